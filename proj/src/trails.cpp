#include "pss/trails.hpp"

#include <algorithm>
#include <stdexcept>

#include "pss/predicate.hpp"

namespace pss {

bool Trail::record(MarkValue v, LocalTime tick, int source) {
    if (blank_left_ > 0) return false;
    marks_.push_back(Mark{static_cast<MarkValue>(v & 3), wrap(tick, tau_max_), source, next_seq_++});
    return true;
}

void Trail::prune(LocalTime now) {
    // A mark stamped ahead of now reads as a huge age and goes too.
    while (!marks_.empty() && age(marks_.front(), now) > window_) marks_.pop_front();
}

void Trail::load(std::vector<Mark> marks, LocalTime now) {
    std::stable_sort(marks.begin(), marks.end(),
                     [&](const Mark& a, const Mark& b) { return age(a, now) > age(b, now); });
    marks_.clear();
    for (auto& m : marks) {
        m.value &= 3;
        m.tick = wrap(m.tick, tau_max_);
        m.seq = next_seq_++;
        marks_.push_back(m);
    }
}

std::vector<TickMark> filter(const Trail& t, Selector s) {
    std::vector<TickMark> out;
    for (const auto& m : t.marks())
        if (selects(s, m.value)) out.push_back(TickMark{m.tick, m.source, m.seq});
    return out;
}

bool find_cluster(const Trail& t, LocalTime now, const ClusterQuery& q) {
    struct Item {
        std::int64_t age;
        int source;
        std::uint64_t seq;
    };
    // Newest first: ascending age.
    std::vector<Item> items;
    items.reserve(t.marks().size());
    for (auto it = t.marks().rbegin(); it != t.marks().rend(); ++it) {
        if (!selects(q.sel, it->value)) continue;
        std::int64_t a = t.age(*it, now);
        if (Fixed::from_int(a) > q.window) break;
        items.push_back(Item{a, it->source, it->seq});
    }
    if (static_cast<int>(items.size()) < q.min_sources) return false;

    std::vector<int> count;
    int distinct = 0, fresh = 0;
    auto add = [&](const Item& x, int delta) {
        if (x.source >= static_cast<int>(count.size())) count.resize(x.source + 1, 0);
        int& c = count[x.source];
        if (delta > 0 && c++ == 0) ++distinct;
        if (delta < 0 && --c == 0) --distinct;
        if (q.newer_than != 0 && x.seq > q.newer_than) fresh += delta;
    };
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < items.size(); ++hi) {
        add(items[hi], +1);
        while (Fixed::from_int(items[hi].age - items[lo].age) > q.span) add(items[lo++], -1);
        if (distinct < q.min_sources) continue;
        if (q.newer_than != 0 && fresh == 0) continue;
        if (q.must_include >= 0 &&
            (q.must_include >= static_cast<int>(count.size()) || count[q.must_include] == 0))
            continue;
        return true;
    }
    return false;
}

bool is_aligned(const std::vector<TickMark>& marks, LocalTime now, std::int64_t tau_max, Fixed eps, Fixed phi_minus,
                Fixed phi_plus) {
    std::vector<Point> pts;
    pts.reserve(marks.size());
    for (const auto& m : marks) pts.push_back(Point{Fixed::from_int(-ominus(now, m.tick, tau_max)), m.source});
    return synchronized_points(pts, eps, phi_minus, phi_plus, Fixed{});
}

bool good_gap(const ParamSet& p, LocalTime current, LocalTime previous) {
    Fixed gap = Fixed::from_int(ominus(current, previous, p.tau_max));
    Fixed T = Fixed::from_int(p.T);
    return gap >= T - p.rho1 && gap <= T + p.rho1;
}

Fixed shortcut_window(const ParamSet& p) { return p.eps0_bar + Fixed::from_int(p.T) + p.rho1; }
Fixed happy_window(const ParamSet& p) { return 2 * p.eps0_bar + mul_up(p.theta, p.Delta_A); }
// The waits run in whole ticks, so the look-back covers the rounded-up wait.
Fixed absorb_window(const ParamSet& p) {
    return Fixed::from_int(p.delta0.ceil_int()) + p.delta0 + 2 * p.theta_d();
}
Fixed engage_window(const ParamSet& p) {
    return Fixed::from_int(p.delta1.ceil_int()) + p.eps1_bar + 2 * p.theta_d();
}
std::int64_t observation_window_ticks(const ParamSet& p) { return p.Delta_obs.ceil_int(); }

TrailFlags classify(const Trail& t, const ParamSet& p, int self, LocalTime now, std::optional<PulsePair> pulses,
                    std::uint64_t engage_newer_than) {
    TrailFlags f;
    if (pulses) f.good = good_gap(p, pulses->current, pulses->previous);

    ClusterQuery sq;
    sq.sel = Selector::b1;
    sq.min_sources = p.n - p.f;
    sq.span = p.eps0_bar;
    sq.window = shortcut_window(p);
    sq.must_include = self;
    f.shortcut = find_cluster(t, now, sq);

    ClusterQuery hq;
    hq.sel = Selector::b2;
    hq.min_sources = p.n - p.f;
    hq.span = p.eps0_bar;
    hq.window = happy_window(p);
    f.happy = find_cluster(t, now, hq);

    ClusterQuery eq;
    eq.sel = Selector::b2;
    eq.min_sources = p.n - 2 * p.f;
    eq.span = p.eps1_bar;
    eq.window = Fixed::from_int(t.window());
    eq.newer_than = engage_newer_than;
    f.engaging = find_cluster(t, now, eq);
    return f;
}

}  // namespace pss
