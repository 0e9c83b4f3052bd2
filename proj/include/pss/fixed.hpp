#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace pss {

// Binary fixed-point scalar with 20 fractional bits. Used for reference time and
// for every derived timing constant, so sums and comparisons are exact.
class Fixed {
public:
    static constexpr int kFracBits = 20;
    static constexpr std::int64_t kOne = std::int64_t{1} << kFracBits;

    constexpr Fixed() = default;

    static constexpr Fixed from_raw(std::int64_t raw) {
        Fixed x;
        x.raw_ = raw;
        return x;
    }
    static constexpr Fixed from_int(std::int64_t v) { return from_raw(v * kOne); }
    // Nearest representable value at or above / at or below v.
    static Fixed from_double_up(double v);
    static Fixed from_double_down(double v);
    // Exact rational num/den rounded up or down.
    static Fixed ratio_up(std::int64_t num, std::int64_t den);
    static Fixed ratio_down(std::int64_t num, std::int64_t den);
    // Parses a decimal string such as "12.5" or "-3"; throws std::invalid_argument.
    static Fixed parse(const std::string& s);

    constexpr std::int64_t raw() const { return raw_; }
    double to_double() const { return static_cast<double>(raw_) / static_cast<double>(kOne); }
    std::int64_t floor_int() const;
    std::int64_t ceil_int() const;
    bool is_integer() const { return (raw_ & (kOne - 1)) == 0; }

    // Exact decimal rendering (every binary fraction has a finite decimal form).
    std::string str() const;

    constexpr Fixed operator-() const { return from_raw(-raw_); }
    constexpr Fixed& operator+=(Fixed o) {
        raw_ += o.raw_;
        return *this;
    }
    constexpr Fixed& operator-=(Fixed o) {
        raw_ -= o.raw_;
        return *this;
    }
    friend constexpr Fixed operator+(Fixed a, Fixed b) { return from_raw(a.raw_ + b.raw_); }
    friend constexpr Fixed operator-(Fixed a, Fixed b) { return from_raw(a.raw_ - b.raw_); }
    friend constexpr Fixed operator*(Fixed a, std::int64_t k) { return from_raw(a.raw_ * k); }
    friend constexpr Fixed operator*(std::int64_t k, Fixed a) { return from_raw(a.raw_ * k); }
    friend constexpr auto operator<=>(Fixed a, Fixed b) = default;

    // Directed-rounding products and quotients.
    friend Fixed mul_up(Fixed a, Fixed b);
    friend Fixed mul_down(Fixed a, Fixed b);
    friend Fixed div_up(Fixed a, Fixed b);
    friend Fixed div_down(Fixed a, Fixed b);

private:
    std::int64_t raw_ = 0;
};

Fixed mul_up(Fixed a, Fixed b);
Fixed mul_down(Fixed a, Fixed b);
Fixed div_up(Fixed a, Fixed b);
Fixed div_down(Fixed a, Fixed b);

inline Fixed max(Fixed a, Fixed b) { return a < b ? b : a; }
inline Fixed min(Fixed a, Fixed b) { return a < b ? a : b; }

}  // namespace pss
