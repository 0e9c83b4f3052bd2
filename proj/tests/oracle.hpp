#pragma once

// Brute-force reference for the synchronization / alignment predicates.
// Only valid when every time, eps and horizon lie on a 1/4 grid: the set of
// good window starts is then a union of intervals with grid endpoints, so
// sampling the 1/8 grid finds it whenever it is non-empty.

#include <algorithm>
#include <map>
#include <vector>

#include "pss/fixed.hpp"
#include "pss/predicate.hpp"

namespace oracle {

using pss::Fixed;
using pss::Point;

inline bool window_ok(const std::map<int, std::vector<Fixed>>& by, Fixed a, Fixed eps, Fixed horizon) {
    for (const auto& [q, ts] : by) {
        bool in = false, later = false;
        for (Fixed x : ts) {
            if (x >= a && x <= a + eps) in = true;
            if (x >= a) later = true;
        }
        if (in) continue;
        if (!later && a + eps > horizon) continue;
        return false;
    }
    return true;
}

inline bool synchronized(const std::vector<Point>& pts, const std::vector<int>& participants, Fixed eps, Fixed lo,
                         Fixed hi, Fixed horizon) {
    std::map<int, std::vector<Fixed>> by;
    for (int q : participants) by[q];
    for (const auto& p : pts) by[p.node].push_back(p.t);
    if (pts.empty()) return true;
    const Fixed eighth = Fixed::from_raw(Fixed::kOne / 8);
    for (auto& [q, ts] : by) std::sort(ts.begin(), ts.end());
    for (const auto& [q, ts] : by) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            Fixed t = ts[i];
            bool ok = false;
            for (Fixed a = t - eps; a <= t && !ok; a += eighth) ok = window_ok(by, a, eps, horizon);
            if (!ok) return false;
            // first later point of q
            const Fixed* nxt = nullptr;
            for (const auto& x : ts)
                if (x > t && (!nxt || x < *nxt)) nxt = &x;
            if (!nxt) {
                if (t + hi <= horizon) return false;
                continue;
            }
            if (*nxt < t + lo || *nxt > t + hi) return false;
        }
    }
    return true;
}

}  // namespace oracle
