#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "pss/params.hpp"

namespace pss {

// Windows and refractory periods of the echo-based I-Accept, in local ticks.
struct IAcceptConfig {
    int n = 4;
    int f = 1;
    std::int64_t support_window = 3;   // f+1 distinct Supports within this many ticks -> Confirm
    std::int64_t confirm_window = 4;   // f+1 Confirms -> Confirm; n-f Confirms -> accept
    std::int64_t refractory = 112;     // per General, after a Confirm and after an accept
    std::int64_t est_window = 4;       // evidence older than this does not shape the estimate
    Fixed est_back = Fixed::from_int(1);  // theta d: a Support seen in tick s was sent after local time s - est_back
    std::int64_t stale = 200;          // estimate used when no evidence is recent (never timely)
    std::optional<Fixed> gate;         // accept only if now - est <= gate

    static IAcceptConfig from_params(const ParamSet& p, bool gate_on);
};

// One node's view of every General. Ticks are the node's own monotone tick
// count, so windows never wrap.
class IAccept {
public:
    IAccept() = default;
    IAccept(const IAcceptConfig& c) : cfg_(c), gens_(static_cast<std::size_t>(c.n)) {}

    struct Action {
        bool confirm = false;
        bool accept = false;
        Fixed est;  // local time of the estimated initiation
    };

    Action on_support(int g, int src, std::int64_t now);
    Action on_confirm(int g, int src, std::int64_t now);

    const IAcceptConfig& config() const { return cfg_; }

    struct GeneralState {
        std::deque<std::pair<std::int64_t, int>> supports;
        std::deque<std::pair<std::int64_t, int>> confirms;
        std::int64_t confirm_ready = INT64_MIN / 4;  // no Confirm before this tick
        std::int64_t accept_ready = INT64_MIN / 4;
        Fixed est_cap;  // after a rejected round, estimates from here on are refused
        std::int64_t cap_until = INT64_MIN / 4;
    };
    GeneralState& general(int g) { return gens_.at(static_cast<std::size_t>(g)); }

private:
    Action evaluate(int g, std::int64_t now);
    std::optional<Fixed> estimate(const GeneralState& s, std::int64_t now) const;
    int confirms_since(const GeneralState& s, std::int64_t now, Fixed est) const;
    static int distinct_within(const std::deque<std::pair<std::int64_t, int>>& q, std::int64_t now, std::int64_t w);

    IAcceptConfig cfg_;
    std::vector<GeneralState> gens_;
};

}  // namespace pss
