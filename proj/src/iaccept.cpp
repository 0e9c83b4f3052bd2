#include "pss/iaccept.hpp"

#include <algorithm>
#include <set>

namespace pss {

IAcceptConfig IAcceptConfig::from_params(const ParamSet& p, bool gate_on) {
    IAcceptConfig c;
    c.n = p.n;
    c.f = p.f;
    Fixed td = p.theta_d();
    c.support_window = (2 * td).ceil_int() + 1;
    c.confirm_window = (3 * td).ceil_int() + 1;
    c.est_window = (3 * td).ceil_int() + 1;
    c.est_back = td;
    c.refractory = mul_up(p.theta, 2 * p.Delta_rmv + 6 * p.d).ceil_int();
    c.stale = mul_up(p.theta, p.Delta_agr).ceil_int() + 2 * c.est_window + 1;
    if (gate_on) c.gate = 4 * td + Fixed::from_int(p.tick_slack);
    return c;
}

int IAccept::distinct_within(const std::deque<std::pair<std::int64_t, int>>& q, std::int64_t now, std::int64_t w) {
    std::set<int> srcs;
    for (auto it = q.rbegin(); it != q.rend() && now - it->first < w; ++it) srcs.insert(it->second);
    return static_cast<int>(srcs.size());
}

// Distinct Confirms in the window that can belong to an initiation at est:
// one sent after it arrives no earlier than local time est - theta d - 1 tick.
int IAccept::confirms_since(const GeneralState& s, std::int64_t now, Fixed est) const {
    std::set<int> srcs;
    Fixed lo = est - cfg_.est_back - Fixed::from_int(1);
    for (auto it = s.confirms.rbegin(); it != s.confirms.rend() && now - it->first < cfg_.confirm_window; ++it)
        if (Fixed::from_int(it->first) > lo) srcs.insert(it->second);
    return static_cast<int>(srcs.size());
}

std::optional<Fixed> IAccept::estimate(const GeneralState& s, std::int64_t now) const {
    std::optional<Fixed> est;
    // (f+1)-th most recent distinct Support in the window.
    std::set<int> seen;
    for (auto it = s.supports.rbegin(); it != s.supports.rend() && now - it->first < cfg_.est_window; ++it) {
        if (!seen.insert(it->second).second) continue;
        if (static_cast<int>(seen.size()) == cfg_.f + 1) {
            Fixed cand = Fixed::from_int(it->first) - cfg_.est_back;
            est = est ? std::max(*est, cand) : cand;
            break;
        }
    }
    return est;
}

IAccept::Action IAccept::evaluate(int g, std::int64_t now) {
    GeneralState& s = general(g);
    std::int64_t keep = std::max({cfg_.support_window, cfg_.confirm_window, cfg_.est_window});
    while (!s.supports.empty() && now - s.supports.front().first >= keep) s.supports.pop_front();
    while (!s.confirms.empty() && now - s.confirms.front().first >= keep) s.confirms.pop_front();

    Action a;
    int sup = distinct_within(s.supports, now, cfg_.support_window);
    int con = distinct_within(s.confirms, now, cfg_.confirm_window);
    if ((sup >= cfg_.f + 1 || con >= cfg_.f + 1) && now >= s.confirm_ready) {
        a.confirm = true;
        s.confirm_ready = now + cfg_.refractory;
    }
    if (con >= cfg_.n - cfg_.f && now >= s.accept_ready) {
        auto est = estimate(s, now);
        if (!cfg_.gate) {
            a.accept = true;
            a.est = est ? *est : Fixed::from_int(now - cfg_.stale);
            s.accept_ready = now + cfg_.refractory;
        } else if (est && confirms_since(s, now, *est) >= cfg_.n - cfg_.f) {
            bool capped = now < s.cap_until && *est >= s.est_cap;
            if (Fixed::from_int(now) - *est <= *cfg_.gate && !capped) {
                a.accept = true;
                a.est = *est;
                s.accept_ready = now + cfg_.refractory;
            } else if (now >= s.cap_until) {
                // missed this round: later rounds must not drift away from it
                s.est_cap = *est + *cfg_.gate;
                s.cap_until = now + cfg_.refractory;
            }
        }
    }
    return a;
}

IAccept::Action IAccept::on_support(int g, int src, std::int64_t now) {
    general(g).supports.emplace_back(now, src);
    return evaluate(g, now);
}

IAccept::Action IAccept::on_confirm(int g, int src, std::int64_t now) {
    general(g).confirms.emplace_back(now, src);
    return evaluate(g, now);
}

}  // namespace pss
