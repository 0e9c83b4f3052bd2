#include "pss/clock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pss {

namespace {
// ceil(a / b) for non-negative a, positive b.
std::int64_t ceil_div(__int128 a, __int128 b) { return static_cast<std::int64_t>((a + b - 1) / b); }
}  // namespace

ClockModel ClockModel::constant(std::int64_t num, std::int64_t den, LocalTime offset, std::int64_t tau_max,
                                Fixed phase) {
    if (num < den || den <= 0) throw std::invalid_argument("clock rate must be at least 1");
    ClockModel c;
    c.kind_ = Kind::constant;
    c.num_ = num;
    c.den_ = den;
    c.tau_max_ = tau_max;
    c.offset_ = wrap(offset, tau_max);
    Fixed first = Fixed::from_raw(ceil_div(static_cast<__int128>(Fixed::kOne) * den, num));
    c.phase_ = phase > Fixed{} ? min(phase, first) : first;
    return c;
}

ClockModel ClockModel::sinusoidal(double amp, double period_ticks, double shift, LocalTime offset,
                                  std::int64_t tau_max, Fixed phase) {
    if (amp < 0 || period_ticks <= 0) throw std::invalid_argument("bad sinusoidal clock");
    ClockModel c;
    c.kind_ = Kind::sinusoidal;
    c.amp_ = amp;
    c.period_ = period_ticks;
    c.shift_ = shift;
    c.tau_max_ = tau_max;
    c.offset_ = wrap(offset, tau_max);
    c.phase_ = phase > Fixed{} ? min(phase, Fixed::from_int(1)) : Fixed::from_int(1);
    c.cache_.push_back(c.phase_);
    return c;
}

void ClockModel::extend(std::int64_t k) const {
    while (static_cast<std::int64_t>(cache_.size()) < k) {
        std::int64_t i = static_cast<std::int64_t>(cache_.size());
        double rate = 1.0 + amp_ * 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period_ + shift_));
        // Cycle rounded up so it never drops below 1/rate.
        auto cyc = static_cast<std::int64_t>(std::ceil(static_cast<double>(Fixed::kOne) / rate));
        cyc = std::min(cyc, Fixed::kOne);
        cache_.push_back(cache_.back() + Fixed::from_raw(cyc));
    }
}

Fixed ClockModel::first_cycle() const {
    return Fixed::from_raw(ceil_div(static_cast<__int128>(Fixed::kOne) * den_, num_));
}

Fixed ClockModel::tick_time(std::int64_t k) const {
    if (k < 1) throw std::out_of_range("tick index starts at 1");
    if (kind_ == Kind::constant) {
        // anchored at k * cycle so integer rates land exactly on the grid
        __int128 span = static_cast<__int128>(k) * Fixed::kOne * den_;
        return phase_ - first_cycle() + Fixed::from_raw(ceil_div(span, num_));
    }
    extend(k);
    return cache_[static_cast<std::size_t>(k - 1)];
}

std::int64_t ClockModel::ticks_upto(Fixed t) const {
    if (t < phase_) return 0;
    if (kind_ == Kind::constant) {
        __int128 x = (t - phase_ + first_cycle()).raw();
        return static_cast<std::int64_t>(x * num_ / (static_cast<__int128>(den_) * Fixed::kOne));
    }
    // Each cycle is at least half a unit, so 2t + 2 ticks bound the search.
    std::int64_t hi = 2 * t.ceil_int() + 2;
    extend(hi);
    auto it = std::upper_bound(cache_.begin(), cache_.begin() + hi, t);
    return it - cache_.begin();
}

}  // namespace pss
