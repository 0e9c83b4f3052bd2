#include "pss/predicate.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace pss {

bool covered(const std::vector<std::vector<Fixed>>& by_node, Fixed t, Fixed eps, Fixed horizon) {
    auto covers = [&](Fixed a) {
        for (const auto& ts : by_node) {
            auto it = std::lower_bound(ts.begin(), ts.end(), a);
            if (it == ts.end()) {
                if (a + eps > horizon) continue;
                return false;
            }
            if (*it > a + eps) return false;
        }
        return true;
    };
    Fixed lo = t - eps;
    auto in_range = [&](Fixed a) { return a >= lo && a <= t; };
    if (covers(lo)) return true;
    const Fixed tiny = Fixed::from_raw(1);
    for (const auto& os : by_node) {
        for (auto it = std::lower_bound(os.begin(), os.end(), t); it != os.end() && *it <= t + eps; ++it)
            if (covers(*it - eps)) return true;
        if (!os.empty() && in_range(os.back() + tiny) && covers(os.back() + tiny)) return true;
    }
    Fixed h = horizon - eps + tiny;
    return in_range(h) && covers(h);
}

bool synchronized_points(const std::vector<Point>& pts, Fixed eps, Fixed phi_minus, Fixed phi_plus, Fixed horizon) {
    return synchronized_points(pts, {}, eps, phi_minus, phi_plus, horizon);
}

bool synchronized_points(const std::vector<Point>& pts, const std::vector<int>& participants, Fixed eps,
                         Fixed phi_minus, Fixed phi_plus, Fixed horizon) {
    if (!(phi_minus > 3 * eps)) throw std::invalid_argument("phi- must exceed 3 eps");
    if (pts.empty()) return true;
    std::map<int, std::vector<Fixed>> by_node;
    for (int q : participants) by_node[q];
    for (const auto& p : pts) by_node[p.node].push_back(p.t);
    for (auto& [node, ts] : by_node) std::sort(ts.begin(), ts.end());
    std::vector<std::vector<Fixed>> lists;
    for (const auto& [node, ts] : by_node) lists.push_back(ts);

    for (const auto& ts : lists) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            Fixed t = ts[i];
            if (!covered(lists, t, eps, horizon)) return false;
            if (i + 1 < ts.size()) {
                Fixed next = ts[i + 1];
                if (next < t + phi_minus || next > t + phi_plus) return false;
            } else if (t + phi_plus <= horizon) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace pss
