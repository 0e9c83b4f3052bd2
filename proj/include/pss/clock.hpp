#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pss/fixed.hpp"
#include "pss/local_time.hpp"

namespace pss {

// Tick schedule of one node. Tick k (k >= 1) happens at tick_time(k); the
// local counter reads offset + (#ticks at or before t), modulo tau_max.
class ClockModel {
public:
    enum class Kind { constant, sinusoidal };

    // Rate num/den >= 1 ticks per reference unit. First tick one cycle after 0
    // unless a phase in (0, 1] is given.
    static ClockModel constant(std::int64_t num, std::int64_t den, LocalTime offset, std::int64_t tau_max,
                               Fixed phase = Fixed{});
    // rate_k = 1 + amp * (1 + sin(2 pi k / period + shift)) / 2, amp <= rho.
    static ClockModel sinusoidal(double amp, double period_ticks, double shift, LocalTime offset,
                                 std::int64_t tau_max, Fixed phase = Fixed{});

    Kind kind() const { return kind_; }
    LocalTime offset() const { return offset_; }
    std::int64_t tau_max() const { return tau_max_; }

    Fixed tick_time(std::int64_t k) const;
    // Number of ticks in [0, t].
    std::int64_t ticks_upto(Fixed t) const;
    LocalTime local_time_at(Fixed t) const { return wrap(offset_ + ticks_upto(t), tau_max_); }
    // Length of the cycle between tick k and tick k+1.
    Fixed cycle(std::int64_t k) const { return tick_time(k + 1) - tick_time(k); }

private:
    void extend(std::int64_t k) const;

    Kind kind_ = Kind::constant;
    LocalTime offset_ = 0;
    std::int64_t tau_max_ = 1;
    Fixed first_cycle() const;
    Fixed phase_;
    std::int64_t num_ = 1, den_ = 1;
    double amp_ = 0, period_ = 1, shift_ = 0;
    mutable std::vector<Fixed> cache_;  // sinusoidal tick times, cache_[k-1]
};

}  // namespace pss
