#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pss/fixed.hpp"

namespace pss {

enum class HoppelpoppMode {
    simple,   // fixed-round immediate DBA, eps_H = eps_B
    general,  // eps_H = eps_B + delta_B
    eventual  // reserved for an early-stopping DBA; not implemented
};

struct ParamInputs {
    Fixed d = Fixed::from_int(1);
    double rho = 0.0;
    int n = 4;
    int f = 1;
    Fixed eps0 = Fixed::from_int(3);
    int K_A = 0;  // 0 selects the smallest legal value K_rho + 1
    int K_B = 0;  // 0 selects the round count of the built-in phase-king DBA
    std::int64_t T = 0;  // 0 selects the smallest integer satisfying the T bound
    HoppelpoppMode mode = HoppelpoppMode::general;
    double rho_max = 0.01;
    // Extra ticks granted to tick-quantized bounds; see README.
    int tick_slack = 0;
    std::int64_t tau_max = 0;  // 0 selects the default power of two
};

struct ParamSet {
    ParamInputs in;

    Fixed d, rho, theta;
    int n = 0, f = 0;
    Fixed eps0, eps0_bar, eps1, eps1_bar, eps2;
    Fixed delta1, delta2, eps_A, delta0;
    std::int64_t T = 0;
    int K_eps = 0, K_rho = 0, K_A = 0;
    Fixed eps_rho, rho1, T_minus, T_plus, Delta_A;

    int K_B = 0;
    Fixed eps_G, eps_B, delta_B, Delta_B, Delta_G, eps_H, delta3;
    Fixed Delta_agr, Delta_rmv, Delta_v, Delta_stb;
    Fixed Delta1, Delta2, Delta3, Delta_relax, Delta0, Delta_c, Delta_e;

    Fixed Delta_obs, delta_eps;
    std::int64_t tau_max = 0;
    int tick_slack = 0;

    // rho * T / theta, the drift term shared by several bounds.
    Fixed drift_T() const;
    // Lower bounds on T from the lemmas, recomputed from the stored fields.
    Fixed T_assign_bound() const;
    Fixed T0_bound() const;
    Fixed T1_bound() const;
    Fixed T_lemma2_bound() const;

    // Tick-valued views used by the protocol. Waits round up.
    std::int64_t ticks_up(Fixed x) const { return x.ceil_int(); }
    Fixed theta_d() const;

    Fixed horizon_min() const;  // Delta_c + Delta_e + 10 K_A T
    std::string digest() const;
};

struct LedgerEntry {
    std::string name;
    std::string relation;
    Fixed lhs;
    Fixed rhs;
    bool pass = false;
};

using Ledger = std::vector<LedgerEntry>;

// Throws std::invalid_argument on rejected inputs and std::runtime_error on
// non-convergence.
ParamSet solve(const ParamInputs& in);
Ledger validate(const ParamSet& p);
bool all_pass(const Ledger& l);

// Rounds of the built-in phase-king DBA: three per phase, f+1 phases.
int phase_king_rounds(int f);

std::string format_params(const ParamSet& p, bool machine_readable);
std::string format_ledger(const Ledger& l, bool machine_readable);

}  // namespace pss
