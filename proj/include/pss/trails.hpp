#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "pss/fixed.hpp"
#include "pss/local_time.hpp"
#include "pss/network.hpp"
#include "pss/params.hpp"

namespace pss {

enum class Selector { b0, b1, b2 };

inline bool selects(Selector s, MarkValue v) {
    switch (s) {
        case Selector::b0: return true;
        case Selector::b1: return (v & GOOD) != 0;
        case Selector::b2: return (v & (GOOD | BEST)) == (GOOD | BEST);
    }
    return false;
}

struct Mark {
    MarkValue value = 0;
    LocalTime tick = 0;
    int source = 0;
    std::uint64_t seq = 0;  // receipt order, used for "new evidence"
};

struct TickMark {
    LocalTime tick = 0;
    int source = 0;
    std::uint64_t seq = 0;
};

// Marks in receipt order; ages (now - tick) never decrease towards the front.
class Trail {
public:
    Trail() = default;
    Trail(std::int64_t tau_max, std::int64_t window) : tau_max_(tau_max), window_(window) {}

    // Returns false (and records nothing) while blanking.
    bool record(MarkValue v, LocalTime tick, int source);
    void prune(LocalTime now);
    void clear() { marks_.clear(); }

    void start_blanking(std::int64_t ticks) { blank_left_ = ticks; }
    void tick_blanking() {
        if (blank_left_ > 0) --blank_left_;
    }
    bool blanking() const { return blank_left_ > 0; }
    std::int64_t blank_left() const { return blank_left_; }

    std::int64_t tau_max() const { return tau_max_; }
    std::int64_t window() const { return window_; }
    const std::deque<Mark>& marks() const { return marks_; }
    std::uint64_t last_seq() const { return next_seq_ - 1; }
    std::int64_t age(const Mark& m, LocalTime now) const { return ominus(now, m.tick, tau_max_); }

    // Arbitrary starting contents; sorted oldest first for the given now.
    void load(std::vector<Mark> marks, LocalTime now);

private:
    std::int64_t tau_max_ = 1;
    std::int64_t window_ = 0;
    std::deque<Mark> marks_;
    std::uint64_t next_seq_ = 1;
    std::int64_t blank_left_ = 0;
};

// Single-valued view keeping marks with selector(value) = 1.
std::vector<TickMark> filter(const Trail& t, Selector s);

struct ClusterQuery {
    Selector sel = Selector::b0;
    int min_sources = 1;
    Fixed span;                          // max tick spread inside the cluster
    Fixed window;                        // only marks with age <= window
    int must_include = -1;               // source that must be in the cluster
    std::uint64_t newer_than = 0;        // some member must have seq > this (0: no constraint)
};

// True iff a subset of the selected marks meets the query.
bool find_cluster(const Trail& t, LocalTime now, const ClusterQuery& q);

// Eq.-(2)-style alignment of a single-valued trail, ticks read as ages
// against `now` (shortest arc within the trail window).
bool is_aligned(const std::vector<TickMark>& marks, LocalTime now, std::int64_t tau_max, Fixed eps, Fixed phi_minus,
                Fixed phi_plus);

struct TrailFlags {
    bool good = false;
    bool shortcut = false;
    bool happy = false;
    bool engaging = false;
};

struct PulsePair {
    LocalTime current = 0;
    LocalTime previous = 0;
};

// Pure classification. `self` is the observing node; `pulses` the two latest
// own pulse ticks when known; `engage_newer_than` the receipt seq consumed by
// the last engagement.
TrailFlags classify(const Trail& t, const ParamSet& p, int self, LocalTime now, std::optional<PulsePair> pulses,
                    std::uint64_t engage_newer_than = 0);

bool good_gap(const ParamSet& p, LocalTime current, LocalTime previous);

// Windows used by the observation step.
Fixed shortcut_window(const ParamSet& p);
Fixed happy_window(const ParamSet& p);
Fixed absorb_window(const ParamSet& p);
Fixed engage_window(const ParamSet& p);
std::int64_t observation_window_ticks(const ParamSet& p);

}  // namespace pss
