#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pss/fixed.hpp"
#include "pss/params.hpp"
#include "pss/predicate.hpp"
#include "pss/trace.hpp"

namespace pss {

// Nonfaulty pulse points at or after `from`.
std::vector<Point> pulse_points(const ExecutionTrace& t, const std::vector<bool>& faulty, Fixed from = Fixed{});
std::vector<int> nonfaulty_ids(const std::vector<bool>& faulty);

// The (eps, phi-, phi+) synchronization predicate over every listed node.
bool is_synchronized(const std::vector<Point>& pts, const std::vector<int>& participants, Fixed eps,
                     Fixed phi_minus, Fixed phi_plus, Fixed horizon);

// Groups time-sorted points into clusters separated by gaps larger than `gap`.
struct Cluster {
    Fixed first, last;
    std::vector<int> nodes;
    std::vector<int> ks;  // k_A of each pulse (pulse clusters only)
    Fixed width() const { return last - first; }
};
std::vector<Cluster> pulse_clusters(const ExecutionTrace& t, const std::vector<bool>& faulty, Fixed gap,
                                    Fixed from = Fixed{});

// Least t* from which the nonfaulty pulses are (eps0, T-, T+)-synchronized up
// to `horizon` and no nonfaulty G event happens. Throws std::invalid_argument
// when the horizon is shorter than the parameter set requires (unless
// allow_short).
std::optional<Fixed> detect_stabilization(const ExecutionTrace& t, const ParamSet& p, const std::vector<bool>& faulty,
                                          Fixed horizon, bool allow_short = false);

struct AbsorptionRun {
    std::vector<Fixed> widths;  // |I_1|, |I_2|, ...
    std::vector<int> ks;
    Fixed start;
    bool contraction_ok = true;  // |I_{k+1}| <= |I_k|/2 + d + rho T / theta
    bool envelope_ok = true;     // |I_k| <= 2^(1-k) eps_A + 2(d + rho T / theta)
};
// `extra` widens the additive slack (check_trace passes tick_slack ticks).
std::vector<AbsorptionRun> convergence_series(const ExecutionTrace& t, const ParamSet& p,
                                              const std::vector<bool>& faulty, Fixed extra = Fixed{});

struct EmergencyReport {
    bool liveness = true;
    bool peaceability = true;
    bool goodluck = true;
    bool separation = true;
    std::vector<std::string> violations;
    int h_clusters = 0;
    bool ok() const { return liveness && peaceability && goodluck && separation; }
};
EmergencyReport emergency_properties(const ExecutionTrace& t, const ParamSet& p, const std::vector<bool>& faulty,
                                     Fixed horizon);

struct NodeAudit {
    int node = 0;
    std::int64_t pulses = 0;
    std::int64_t mark_sends = 0;
    std::int64_t other_sends = 0;  // emergency-path traffic
    std::int64_t g_events = 0;
    int alphabet = 0;              // distinct mark values sent
    bool alphabet_ok = true;       // subset of {}, {GOOD}, {GOOD,BEST}
    bool ok() const { return pulses == mark_sends && other_sends == 0 && g_events == 0 && alphabet_ok; }
};
std::vector<NodeAudit> message_audit(const ExecutionTrace& t, const std::vector<bool>& faulty, Fixed t_star);

struct ClockReadout {
    int cycles = 0;
    bool agree = true;       // equal k_A inside every cluster
    bool advances = true;    // k_A steps by one (mod K_A) between clusters
    std::vector<int> ks;
};
ClockReadout digital_clock_readout(const ExecutionTrace& t, const ParamSet& p, const std::vector<bool>& faulty,
                                   Fixed t_star);

struct SyncReport {
    std::optional<Fixed> t_star;
    Fixed bound;  // Delta_c + Delta_e
    Fixed precision;  // widest post-t* cluster
    std::vector<Fixed> widths;
    bool synchronized = false;
    bool peaceful = false;
    std::vector<NodeAudit> audit;
    ClockReadout clock;
    EmergencyReport emergency;
    std::vector<AbsorptionRun> absorption;
    bool contraction_ok = true;
    bool ok() const;
};
SyncReport check_trace(const ExecutionTrace& t, const ParamSet& p, bool allow_short = false);
std::string format_report(const SyncReport& r, bool machine_readable);

}  // namespace pss
