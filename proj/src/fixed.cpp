#include "pss/fixed.hpp"

#include <cmath>
#include <stdexcept>

namespace pss {

namespace {

using i128 = __int128;

std::int64_t floor_div(i128 num, i128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 q = num / den;
    if ((num % den) != 0 && num < 0) --q;
    return static_cast<std::int64_t>(q);
}

std::int64_t ceil_div(i128 num, i128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 q = num / den;
    if ((num % den) != 0 && num > 0) ++q;
    return static_cast<std::int64_t>(q);
}

}  // namespace

Fixed Fixed::from_double_up(double v) {
    return from_raw(static_cast<std::int64_t>(std::ceil(v * static_cast<double>(kOne))));
}

Fixed Fixed::from_double_down(double v) {
    return from_raw(static_cast<std::int64_t>(std::floor(v * static_cast<double>(kOne))));
}

Fixed Fixed::ratio_up(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("Fixed::ratio_up: zero denominator");
    return from_raw(ceil_div(static_cast<i128>(num) * kOne, den));
}

Fixed Fixed::ratio_down(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("Fixed::ratio_down: zero denominator");
    return from_raw(floor_div(static_cast<i128>(num) * kOne, den));
}

Fixed Fixed::parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty number");
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '-' || s[i] == '+') {
        neg = s[i] == '-';
        ++i;
    }
    i128 int_part = 0;
    bool any = false;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        int_part = int_part * 10 + (s[i] - '0');
        if (int_part > (i128{1} << 42)) throw std::invalid_argument("number out of range: " + s);
        ++i;
        any = true;
    }
    i128 frac_num = 0;
    i128 frac_den = 1;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            if (frac_den < i128{1000000000000000000}) {
                frac_num = frac_num * 10 + (s[i] - '0');
                frac_den *= 10;
            }
            ++i;
            any = true;
        }
    }
    if (!any || i != s.size()) throw std::invalid_argument("not a decimal number: " + s);
    // Nearest-below for the fraction keeps exact binary fractions exact.
    i128 raw = int_part * kOne + (frac_num * kOne + frac_den / 2) / frac_den;
    return from_raw(static_cast<std::int64_t>(neg ? -raw : raw));
}

std::int64_t Fixed::floor_int() const { return floor_div(raw_, kOne); }
std::int64_t Fixed::ceil_int() const { return ceil_div(raw_, kOne); }

std::string Fixed::str() const {
    std::int64_t r = raw_;
    std::string out;
    if (r < 0) {
        out.push_back('-');
        r = -r;
    }
    std::int64_t ip = r >> kFracBits;
    std::int64_t fp = r & (kOne - 1);
    out += std::to_string(ip);
    if (fp != 0) {
        out.push_back('.');
        // fp / 2^20 = fp * 5^20 / 10^20
        i128 scaled = static_cast<i128>(fp) * 95367431640625LL;  // 5^20
        std::string digits(20, '0');
        for (int k = 19; k >= 0; --k) {
            digits[static_cast<std::size_t>(k)] = static_cast<char>('0' + static_cast<int>(scaled % 10));
            scaled /= 10;
        }
        while (!digits.empty() && digits.back() == '0') digits.pop_back();
        out += digits;
    }
    return out;
}

Fixed mul_up(Fixed a, Fixed b) {
    return Fixed::from_raw(ceil_div(static_cast<i128>(a.raw_) * b.raw_, Fixed::kOne));
}

Fixed mul_down(Fixed a, Fixed b) {
    return Fixed::from_raw(floor_div(static_cast<i128>(a.raw_) * b.raw_, Fixed::kOne));
}

Fixed div_up(Fixed a, Fixed b) {
    if (b.raw_ == 0) throw std::domain_error("Fixed division by zero");
    return Fixed::from_raw(ceil_div(static_cast<i128>(a.raw_) * Fixed::kOne, b.raw_));
}

Fixed div_down(Fixed a, Fixed b) {
    if (b.raw_ == 0) throw std::domain_error("Fixed division by zero");
    return Fixed::from_raw(floor_div(static_cast<i128>(a.raw_) * Fixed::kOne, b.raw_));
}

}  // namespace pss
