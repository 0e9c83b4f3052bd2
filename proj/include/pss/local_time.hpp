#pragma once

#include <cstdint>

namespace pss {

// Tick counter value in [0, tau_max). All arithmetic wraps.
using LocalTime = std::int64_t;

inline LocalTime wrap(std::int64_t v, std::int64_t tau_max) {
    std::int64_t r = v % tau_max;
    return r < 0 ? r + tau_max : r;
}
inline LocalTime oplus(LocalTime a, std::int64_t b, std::int64_t tau_max) { return wrap(a + b, tau_max); }
// a - b on the circle, in [0, tau_max).
inline std::int64_t ominus(LocalTime a, LocalTime b, std::int64_t tau_max) { return wrap(a - b, tau_max); }

}  // namespace pss
