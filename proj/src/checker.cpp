#include "pss/checker.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pss/sim.hpp"

namespace pss {

namespace {

bool good_node(const std::vector<bool>& faulty, int i) {
    return i >= 0 && (static_cast<std::size_t>(i) >= faulty.size() || !faulty[static_cast<std::size_t>(i)]);
}

std::vector<std::vector<Fixed>> times_by_node(const ExecutionTrace& t, const std::vector<bool>& faulty, Kind k,
                                              int n) {
    std::vector<std::vector<Fixed>> out;
    std::map<int, std::size_t> index;
    for (int i = 0; i < n; ++i)
        if (good_node(faulty, i)) {
            index[i] = out.size();
            out.emplace_back();
        }
    for (const auto& r : t.records)
        if (r.kind == k && index.count(r.node)) out[index[r.node]].push_back(r.time);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

int meta_n(const ExecutionTrace& t, const std::vector<bool>& faulty) {
    if (auto it = t.meta.find("n"); it != t.meta.end()) return std::stoi(it->second);
    return static_cast<int>(faulty.size());
}

}  // namespace

std::vector<int> nonfaulty_ids(const std::vector<bool>& faulty) {
    std::vector<int> out;
    for (std::size_t i = 0; i < faulty.size(); ++i)
        if (!faulty[i]) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<Point> pulse_points(const ExecutionTrace& t, const std::vector<bool>& faulty, Fixed from) {
    std::vector<Point> out;
    for (const auto& r : t.records)
        if (r.kind == Kind::P && r.time >= from && good_node(faulty, r.node)) out.push_back(Point{r.time, r.node});
    return out;
}

bool is_synchronized(const std::vector<Point>& pts, const std::vector<int>& participants, Fixed eps, Fixed phi_minus,
                     Fixed phi_plus, Fixed horizon) {
    return synchronized_points(pts, participants, eps, phi_minus, phi_plus, horizon);
}

std::vector<Cluster> pulse_clusters(const ExecutionTrace& t, const std::vector<bool>& faulty, Fixed gap, Fixed from) {
    std::vector<Cluster> out;
    Fixed prev;
    for (const auto& r : t.records) {
        if (r.kind != Kind::P || r.time < from || !good_node(faulty, r.node)) continue;
        if (out.empty() || r.time - prev > gap) out.push_back(Cluster{r.time, r.time, {}, {}});
        out.back().last = r.time;
        out.back().nodes.push_back(r.node);
        out.back().ks.push_back(static_cast<int>(r.a));
        prev = r.time;
    }
    return out;
}

std::optional<Fixed> detect_stabilization(const ExecutionTrace& t, const ParamSet& p, const std::vector<bool>& faulty,
                                          Fixed horizon, bool allow_short) {
    if (!allow_short && horizon < p.horizon_min())
        throw std::invalid_argument("horizon " + horizon.str() + " shorter than required " + p.horizon_min().str());
    std::optional<Fixed> last_g;
    for (const auto& r : t.records)
        if (is_g_kind(r.kind) && good_node(faulty, r.node)) last_g = r.time;
    auto ids = nonfaulty_ids(faulty);
    auto clusters = pulse_clusters(t, faulty, p.T_minus - 2 * p.eps0);
    auto pts = pulse_points(t, faulty);
    for (const auto& c : clusters) {
        if (last_g && c.first <= *last_g) continue;
        std::vector<Point> suffix;
        for (const auto& q : pts)
            if (q.t >= c.first) suffix.push_back(q);
        if (synchronized_points(suffix, ids, p.eps0, p.T_minus, p.T_plus, horizon)) return c.first;
    }
    return std::nullopt;
}

std::vector<AbsorptionRun> convergence_series(const ExecutionTrace& t, const ParamSet& p,
                                              const std::vector<bool>& faulty, Fixed extra) {
    auto ids = nonfaulty_ids(faulty);
    auto clusters = pulse_clusters(t, faulty, p.T_minus - 2 * p.eps0);
    std::vector<Fixed> disturb;
    for (const auto& r : t.records)
        if ((r.kind == Kind::L1 || r.kind == Kind::D1 || r.kind == Kind::D2) && good_node(faulty, r.node))
            disturb.push_back(r.time);

    auto complete_with = [&](const Cluster& c, int k) {
        if (c.nodes.size() != ids.size()) return false;
        std::set<int> s(c.nodes.begin(), c.nodes.end());
        if (s.size() != ids.size()) return false;
        for (int x : c.ks)
            if (x != k) return false;
        return true;
    };
    auto disturbed = [&](Fixed a, Fixed b) {
        auto it = std::lower_bound(disturb.begin(), disturb.end(), a);
        return it != disturb.end() && *it <= b;
    };

    const Fixed slack = p.d + p.drift_T() + extra;
    std::vector<AbsorptionRun> runs;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (!complete_with(clusters[i], 1)) continue;
        AbsorptionRun run;
        run.start = clusters[i].first;
        run.widths.push_back(clusters[i].width());
        run.ks.push_back(1);
        std::size_t j = i;
        while (j + 1 < clusters.size() && run.ks.back() + 1 < p.K_A &&
               complete_with(clusters[j + 1], run.ks.back() + 1) &&
               !disturbed(clusters[j].first, clusters[j + 1].last)) {
            ++j;
            run.widths.push_back(clusters[j].width());
            run.ks.push_back(run.ks.back() + 1);
        }
        for (std::size_t k = 0; k < run.widths.size(); ++k) {
            int idx = run.ks[k];
            // |I_k| <= 2^(1-k) eps_A + 2 slack, compared exactly after scaling by 2^(k-1)
            Fixed lhs = run.widths[k] * (std::int64_t{1} << (idx - 1));
            Fixed rhs = p.eps_A + 2 * slack * (std::int64_t{1} << (idx - 1));
            if (lhs > rhs) run.envelope_ok = false;
            if (k + 1 < run.widths.size() && 2 * run.widths[k + 1] > run.widths[k] + 2 * slack)
                run.contraction_ok = false;
        }
        runs.push_back(run);
        i = j;
    }
    return runs;
}

EmergencyReport emergency_properties(const ExecutionTrace& t, const ParamSet& p, const std::vector<bool>& faulty,
                                     Fixed horizon) {
    EmergencyReport rep;
    const int n = meta_n(t, faulty);
    const Fixed start = p.Delta_c;

    // Liveness: every window of length Delta0 inside [Delta_c, horizon] sees H or L2.
    {
        std::vector<Fixed> ev;
        for (const auto& r : t.records)
            if ((r.kind == Kind::H || r.kind == Kind::L2) && good_node(faulty, r.node) && r.time >= start &&
                r.time <= horizon)
                ev.push_back(r.time);
        if (horizon - start >= p.Delta0) {
            bool ok = true;
            Fixed prev = start;
            for (Fixed e : ev) {
                if (e - prev > p.Delta0) ok = false;
                prev = e;
            }
            if (horizon - prev > p.Delta0) ok = false;
            if (!ok) {
                rep.liveness = false;
                rep.violations.push_back("liveness: a window of length Delta0 after Delta_c has no H or L2");
            }
        }
    }

    // Peaceability: all-happy stretches carry no G events from Delta1 on.
    {
        std::map<int, bool> happy;
        for (int i = 0; i < n; ++i)
            if (good_node(faulty, i)) happy[i] = false;
        int count = 0;
        std::optional<Fixed> since;
        std::vector<std::pair<Fixed, Fixed>> stretches;
        std::vector<Fixed> gs;
        std::size_t i = 0;
        const auto& R = t.records;
        while (i < R.size()) {
            Fixed now = R[i].time;
            for (; i < R.size() && R[i].time == now; ++i) {
                const auto& r = R[i];
                if (!good_node(faulty, r.node)) continue;
                if (is_g_kind(r.kind)) gs.push_back(r.time);
                std::int64_t fl = -1;
                if (r.kind == Kind::C) fl = r.b;
                if (r.kind == Kind::R) fl = r.x;
                if (fl < 0) continue;
                bool h = (fl & 1) != 0;
                auto it = happy.find(r.node);
                if (it == happy.end() || it->second == h) continue;
                count += h ? 1 : -1;
                it->second = h;
            }
            bool all = count == static_cast<int>(happy.size()) && !happy.empty();
            if (all && !since) since = now;
            if (!all && since) {
                stretches.emplace_back(*since, now);
                since.reset();
            }
        }
        if (since) stretches.emplace_back(*since, horizon + Fixed::from_raw(1));
        for (const auto& [s, e] : stretches) {
            Fixed from = max(s, start) + p.Delta1;
            auto it = std::lower_bound(gs.begin(), gs.end(), from);
            if (it != gs.end() && *it < e) {
                rep.peaceability = false;
                rep.violations.push_back("peaceability: G event at " + it->str() + " in a happy stretch from " +
                                         s.str());
            }
        }
    }

    // GoodLuck and Separation over H events after Delta_c.
    {
        auto lists = times_by_node(t, faulty, Kind::H, n);
        std::vector<Fixed> all;
        for (const auto& l : lists)
            for (Fixed x : l)
                if (x >= start) all.push_back(x);
        std::sort(all.begin(), all.end());
        for (Fixed x : all)
            if (!covered(lists, x, p.eps_H, horizon)) {
                rep.goodluck = false;
                rep.violations.push_back("goodluck: H at " + x.str() + " has no system-wide cluster within eps_H");
                break;
            }
        // Clusters: gaps above eps_H separate them.
        std::size_t i = 0;
        while (i < all.size()) {
            std::size_t j = i;
            while (j + 1 < all.size() && all[j + 1] - all[j] <= p.eps_H) ++j;
            Fixed s = all[i], e = all[j];
            ++rep.h_clusters;
            bool found = false;
            std::vector<Fixed> cand{s + p.Delta2};
            for (Fixed x : all)
                if (x >= s + p.Delta2 && x < e + p.Delta2) cand.push_back(x + Fixed::from_raw(1));
            for (Fixed c : cand) {
                if (c > e + p.Delta2) continue;
                auto it = std::lower_bound(all.begin(), all.end(), c);
                if (it == all.end() || *it > c + p.Delta3) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                rep.separation = false;
                rep.violations.push_back("separation: no H-free window after the H cluster at " + s.str());
            }
            i = j + 1;
        }
    }
    return rep;
}

std::vector<NodeAudit> message_audit(const ExecutionTrace& t, const std::vector<bool>& faulty, Fixed t_star) {
    std::map<int, NodeAudit> m;
    std::map<int, std::set<std::int64_t>> alpha;
    for (int i : nonfaulty_ids(faulty)) m[i].node = i;
    for (const auto& r : t.records) {
        if (r.time < t_star || !good_node(faulty, r.node)) continue;
        auto& a = m[r.node];
        a.node = r.node;
        if (r.kind == Kind::P) ++a.pulses;
        if (is_g_kind(r.kind)) ++a.g_events;
        if (r.kind == Kind::S) {
            if (r.a == static_cast<std::int64_t>(MsgType::Mark)) {
                ++a.mark_sends;
                alpha[r.node].insert(r.b);
                if (r.b == 2) a.alphabet_ok = false;
            } else {
                ++a.other_sends;
            }
        }
    }
    std::vector<NodeAudit> out;
    for (auto& [i, a] : m) {
        a.alphabet = static_cast<int>(alpha[i].size());
        out.push_back(a);
    }
    return out;
}

ClockReadout digital_clock_readout(const ExecutionTrace& t, const ParamSet& p, const std::vector<bool>& faulty,
                                   Fixed t_star) {
    ClockReadout out;
    auto clusters = pulse_clusters(t, faulty, p.T_minus - 2 * p.eps0, t_star);
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto& c = clusters[i];
        int k = c.ks.front();
        for (int x : c.ks)
            if (x != k) out.agree = false;
        if (!out.ks.empty() && (out.ks.back() + 1) % p.K_A != k) out.advances = false;
        out.ks.push_back(k);
    }
    out.cycles = static_cast<int>(out.ks.size());
    return out;
}

bool SyncReport::ok() const {
    bool audit_ok = std::all_of(audit.begin(), audit.end(), [](const NodeAudit& a) { return a.ok(); });
    return t_star && *t_star <= bound && synchronized && peaceful && audit_ok && clock.agree && clock.advances &&
           emergency.ok() && contraction_ok;
}

SyncReport check_trace(const ExecutionTrace& t, const ParamSet& p, bool allow_short) {
    SyncReport r;
    auto faulty = faulty_mask(t);
    if (faulty.empty()) faulty.assign(static_cast<std::size_t>(p.n), false);
    Fixed horizon;
    if (auto it = t.meta.find("horizon"); it != t.meta.end()) horizon = Fixed::parse(it->second);
    else if (!t.records.empty()) horizon = t.records.back().time;
    r.bound = p.Delta_c + p.Delta_e;
    r.t_star = detect_stabilization(t, p, faulty, horizon, allow_short);
    r.emergency = emergency_properties(t, p, faulty, horizon);
    r.absorption = convergence_series(t, p, faulty, Fixed::from_int(p.tick_slack));
    for (const auto& a : r.absorption) r.contraction_ok = r.contraction_ok && a.contraction_ok && a.envelope_ok;
    if (r.t_star) {
        r.synchronized = true;
        r.peaceful = true;
        for (const auto& c : pulse_clusters(t, faulty, p.T_minus - 2 * p.eps0, *r.t_star)) {
            r.widths.push_back(c.width());
            r.precision = max(r.precision, c.width());
        }
        r.audit = message_audit(t, faulty, *r.t_star);
        r.clock = digital_clock_readout(t, p, faulty, *r.t_star);
    }
    return r;
}

std::string format_report(const SyncReport& r, bool machine_readable) {
    if (machine_readable) {
        nlohmann::ordered_json j;
        j["stabilized"] = r.t_star.has_value();
        j["t_star"] = r.t_star ? r.t_star->str() : "";
        j["bound"] = r.bound.str();
        j["precision"] = r.precision.str();
        j["cycles"] = r.widths.size();
        j["peaceful"] = r.peaceful;
        j["clock_agree"] = r.clock.agree && r.clock.advances;
        j["liveness"] = r.emergency.liveness;
        j["peaceability"] = r.emergency.peaceability;
        j["goodluck"] = r.emergency.goodluck;
        j["separation"] = r.emergency.separation;
        j["h_clusters"] = r.emergency.h_clusters;
        j["absorption_runs"] = r.absorption.size();
        j["contraction"] = r.contraction_ok;
        auto audit = nlohmann::ordered_json::array();
        for (const auto& a : r.audit)
            audit.push_back({{"node", a.node},
                             {"pulses", a.pulses},
                             {"mark_sends", a.mark_sends},
                             {"other_sends", a.other_sends},
                             {"alphabet", a.alphabet}});
        j["audit"] = audit;
        j["violations"] = r.emergency.violations;
        j["ok"] = r.ok();
        return j.dump() + "\n";
    }
    std::ostringstream o;
    if (r.t_star)
        o << "stabilized at t*=" << r.t_star->str() << " (bound " << r.bound.str() << ")\n";
    else
        o << "not stabilized (bound " << r.bound.str() << ")\n";
    o << "post-t* cycles: " << r.widths.size() << ", widest cluster " << r.precision.str() << "\n";
    o << "peaceful: " << (r.peaceful ? "yes" : "no") << ", digital clock: "
      << (r.clock.agree && r.clock.advances ? "consistent" : "inconsistent") << "\n";
    o << "emergency: liveness " << (r.emergency.liveness ? "ok" : "FAIL") << ", peaceability "
      << (r.emergency.peaceability ? "ok" : "FAIL") << ", goodluck " << (r.emergency.goodluck ? "ok" : "FAIL")
      << ", separation " << (r.emergency.separation ? "ok" : "FAIL") << " (" << r.emergency.h_clusters
      << " H clusters)\n";
    o << "absorption runs: " << r.absorption.size() << ", contraction " << (r.contraction_ok ? "ok" : "FAIL")
      << "\n";
    for (const auto& a : r.audit)
        o << "  node " << a.node << ": " << a.pulses << " pulses, " << a.mark_sends << " marks, " << a.other_sends
          << " other, alphabet " << a.alphabet << "\n";
    for (const auto& v : r.emergency.violations) o << "  " << v << "\n";
    o << (r.ok() ? "OK" : "VIOLATION") << "\n";
    return o.str();
}

}  // namespace pss
