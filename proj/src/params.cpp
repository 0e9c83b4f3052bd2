#include "pss/params.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pss {

namespace {

Fixed F(std::int64_t v) { return Fixed::from_int(v); }

// x / 2^k rounded up, k may be negative.
Fixed scale_pow2_up(Fixed x, int k) {
    if (k <= 0) return x * (std::int64_t{1} << (-k));
    std::int64_t r = x.raw();
    std::int64_t q = r >> k;
    if ((q << k) != r) ++q;
    return Fixed::from_raw(q);
}

// Smallest k with den * 2^k >= num (both positive).
int ceil_log2_ratio(Fixed num, Fixed den) {
    int k = 0;
    while (den < num) {
        den = den * 2;
        ++k;
    }
    while (k > -60 && den >= num * 2) {
        num = num * 2;
        --k;
    }
    return k;
}

void fill_chain(ParamSet& p, std::int64_t T) {
    const Fixed d = p.d;
    auto tm = [&](Fixed x) { return mul_up(p.theta, x); };

    p.T = T;
    p.eps0_bar = tm(p.eps0 + d);
    p.eps1 = p.eps0_bar + d;
    p.eps1_bar = tm(p.eps1 + d);
    p.eps2 = p.eps1_bar + d;
    p.delta1 = p.eps0_bar;
    p.delta2 = tm(d);
    const Fixed dT = p.drift_T();
    p.eps_A = 3 * p.eps1 + p.eps2 + p.delta1 + 5 * d + dT;
    p.delta0 = tm(p.eps_A + d);

    const Fixed denom = p.eps0 - 2 * (d + dT);
    if (denom <= Fixed{}) {
        throw std::invalid_argument("eps0 must exceed 2(d + rho T / theta); got eps0=" + p.eps0.str() +
                                    " and 2(d + rho T / theta)=" + (2 * (d + dT)).str());
    }
    p.K_eps = 1 + ceil_log2_ratio(p.eps_A, denom);
    p.K_rho = p.K_eps + 1;
    p.K_A = p.in.K_A > 0 ? p.in.K_A : p.K_rho + 1;
    p.eps_rho = scale_pow2_up(p.eps_A, p.K_rho - 2) + 2 * (d + dT);
    p.rho1 = mul_up(p.rho, F(T)) + tm(p.eps_rho + 2 * d);
    p.T_minus = div_up(F(T), p.theta) - 2 * p.eps0;
    p.T_plus = F(T) + 2 * p.eps0;
    p.Delta_A = p.eps_A + p.K_A * (F(T) + d) + p.eps0 + d;

    p.eps_G = 3 * d;
    p.eps_B = p.eps_G + d;
    for (int it = 0;; ++it) {
        if (it > 10000) throw std::runtime_error("eps_B iteration did not converge (rho too large)");
        p.delta_B = 2 * tm(p.eps_B);
        p.Delta_B = (p.K_B + 1) * p.delta_B;
        Fixed next = mul_up(p.rho, p.Delta_B) + p.eps_G + d;
        if (next == p.eps_B) break;
        if (next > F(std::int64_t{1} << 30)) throw std::runtime_error("eps_B iteration diverged (rho too large)");
        p.eps_B = next;
    }
    p.Delta_G = p.Delta_B + 4 * tm(d);
    p.eps_H = p.in.mode == HoppelpoppMode::simple ? p.eps_B : p.eps_B + p.delta_B;
    p.delta3 = tm(p.eps_H + d);

    p.Delta_agr = p.Delta_B;
    p.Delta_rmv = p.Delta_agr + 13 * d;
    p.Delta_v = 2 * p.Delta_rmv + 15 * d;
    p.Delta_stb = 2 * (20 * d + 4 * p.Delta_rmv);
    p.Delta1 = p.Delta_v + p.Delta_B + 2 * d;
    p.Delta2 = p.eps_H + p.Delta_v + p.Delta_B + d;
    p.Delta3 = p.Delta_A;
    p.Delta_relax = tm(p.Delta2 + p.Delta3 + p.eps_H + d);
    p.Delta0 = max(2 * p.eps0_bar + tm(p.Delta_A), p.Delta_relax) + p.Delta_v + p.Delta_B + 7 * d;
    p.Delta_c = p.Delta_stb + p.Delta_relax + p.Delta_A;
    p.Delta_e = p.Delta_A + p.Delta0 + p.Delta1 + p.Delta2 + p.Delta3 + p.eps2 + p.eps0 + d;

    p.Delta_obs = tm(2 * p.eps0_bar + tm(p.Delta_A)) + p.delta1 + p.eps1_bar + 10 * tm(d);
    p.delta_eps = 2 * p.delta0 + 3 * tm(d);

    if (p.in.tau_max > 0) {
        p.tau_max = p.in.tau_max;
    } else {
        Fixed need = 16 * tm(max(p.Delta_obs, p.K_A * F(T)));
        std::int64_t t = 1;
        while (F(t) < need) t <<= 1;
        p.tau_max = t;
    }
}

}  // namespace

int phase_king_rounds(int f) { return 3 * (f + 1); }

Fixed ParamSet::drift_T() const { return div_up(mul_up(rho, Fixed::from_int(T)), theta); }

Fixed ParamSet::theta_d() const { return mul_up(theta, d); }

Fixed ParamSet::T_assign_bound() const {
    Fixed num = mul_up(theta, 3 * delta0 + eps_A + 9 * d);
    return div_up(num, Fixed::from_int(1) - rho);
}

Fixed ParamSet::T0_bound() const {
    Fixed a = div_up(delta0 + mul_up(theta, 3 * eps1 + eps2 + 2 * delta0 + delta1 + 13 * d),
                     Fixed::from_int(1) - rho);
    Fixed b = mul_up(theta, 3 * eps1 + 2 * eps2 + delta1 + delta2 + rho1 + 5 * d);
    return max(a, b);
}

Fixed ParamSet::T1_bound() const {
    return div_up(delta0 + mul_up(theta, eps_A + 2 * delta0 + 9 * d), Fixed::from_int(1) - rho);
}

Fixed ParamSet::T_lemma2_bound() const {
    Fixed I = 2 * eps1 + eps2 + 3 * d + div_up(mul_up(rho, delta1), theta);
    return div_up(delta0 + delta1 + eps1_bar + mul_up(theta, I + 2 * delta0 + 9 * d), Fixed::from_int(1) - rho);
}

Fixed ParamSet::horizon_min() const { return Delta_c + Delta_e + 10 * K_A * Fixed::from_int(T); }

ParamSet solve(const ParamInputs& in) {
    if (in.n <= 3 * in.f) throw std::invalid_argument("n must exceed 3f");
    if (in.f < 0) throw std::invalid_argument("f must be non-negative");
    if (!(in.rho >= 0.0) || !std::isfinite(in.rho)) throw std::invalid_argument("rho must be a finite non-negative number");
    if (in.rho >= in.rho_max) {
        std::ostringstream os;
        os << "rho=" << in.rho << " is not below the accepted bound " << in.rho_max;
        throw std::invalid_argument(os.str());
    }
    if (in.d <= Fixed{}) throw std::invalid_argument("d must be positive");
    if (in.eps0 <= Fixed{}) throw std::invalid_argument("eps0 must be positive");
    if (in.mode == HoppelpoppMode::eventual) throw std::invalid_argument("unsupported: eventual DBA mode is reserved");
    if (in.K_A != 0 && in.K_A < 2) throw std::invalid_argument("K_A must be at least 2");
    if (in.K_B < 0) throw std::invalid_argument("K_B must be positive");
    if (in.T < 0) throw std::invalid_argument("T must be positive");
    if (in.tick_slack < 0) throw std::invalid_argument("tick_slack must be non-negative");

    ParamSet p;
    p.in = in;
    p.d = in.d;
    p.rho = Fixed::from_double_up(in.rho);
    p.theta = Fixed::from_int(1) + p.rho;
    p.n = in.n;
    p.f = in.f;
    p.eps0 = in.eps0;
    p.K_B = in.K_B > 0 ? in.K_B : phase_king_rounds(in.f);
    p.tick_slack = in.tick_slack;

    if (in.T > 0) {
        fill_chain(p, in.T);
        return p;
    }
    std::int64_t T = 1;
    for (int it = 0; it < 1000; ++it) {
        fill_chain(p, T);
        Fixed bound = max(max(p.T_assign_bound(), p.T0_bound()), max(p.T1_bound(), p.T_lemma2_bound()));
        std::int64_t next = bound.ceil_int();
        if (next <= T) return p;
        T = next;
        if (T > (std::int64_t{1} << 32)) break;
    }
    throw std::runtime_error("T iteration did not converge (rho too large)");
}

Ledger validate(const ParamSet& p) {
    Ledger l;
    auto add = [&](std::string name, std::string rel, Fixed lhs, Fixed rhs, bool pass) {
        l.push_back(LedgerEntry{std::move(name), std::move(rel), lhs, rhs, pass});
    };
    const Fixed d = p.d;
    const Fixed dT = p.drift_T();
    auto tm = [&](Fixed x) { return mul_up(p.theta, x); };
    const Fixed T = Fixed::from_int(p.T);

    add("resilience", "n > 3f", Fixed::from_int(p.n), Fixed::from_int(3 * p.f), p.n > 3 * p.f);
    Fixed rmax = Fixed::from_double_down(p.in.rho_max);
    add("drift", "rho < rho_max", p.rho, rmax, p.rho < rmax);
    add("precision", "eps0 > 2(d + rho T/theta)", p.eps0, 2 * (d + dT), p.eps0 > 2 * (d + dT));
    add("sync side condition", "T- > 3 eps0", p.T_minus, 3 * p.eps0, p.T_minus > 3 * p.eps0);
    add("trail side condition", "T- - theta d > 3 eps0_bar", p.T_minus - tm(d), 3 * p.eps0_bar,
        p.T_minus - tm(d) > 3 * p.eps0_bar);
    add("T assignment", "T >= theta(3 delta0 + eps_A + 9d)/(1-rho)", T, p.T_assign_bound(), T >= p.T_assign_bound());
    add("T0", "T >= T0", T, p.T0_bound(), T >= p.T0_bound());
    add("T1", "T >= T1", T, p.T1_bound(), T >= p.T1_bound());
    add("T lemma2", "T >= (delta0+delta1+eps1_bar+theta(|I|+2delta0+9d))/(1-rho)", T, p.T_lemma2_bound(),
        T >= p.T_lemma2_bound());
    add("delta0", "delta0 >= theta(eps_A + d)", p.delta0, tm(p.eps_A + d), p.delta0 >= tm(p.eps_A + d));
    add("delta2", "delta2 >= theta d", p.delta2, tm(d), p.delta2 >= tm(d));
    Fixed dB = 2 * tm(mul_up(p.rho, p.Delta_B) + p.eps_G + d);
    add("round separation", "delta_B >= 2 theta(rho Delta_B + eps_G + d)", p.delta_B, dB, p.delta_B >= dB);
    Fixed shrink = scale_pow2_up(p.eps_A, p.K_eps - 1) + 2 * (d + dT);
    add("K_eps", "2^(1-K_eps) eps_A + 2(d + rho T/theta) <= eps0", shrink, p.eps0, shrink <= p.eps0);
    add("K_A", "K_A >= K_eps + 1", Fixed::from_int(p.K_A), Fixed::from_int(p.K_eps + 1), p.K_A >= p.K_eps + 1);
    add("K_A", "K_A > K_rho", Fixed::from_int(p.K_A), Fixed::from_int(p.K_rho), p.K_A > p.K_rho);
    Fixed relax = tm(p.Delta2 + p.Delta3 + p.eps_H + d);
    add("relax", "Delta_relax >= theta(Delta2 + Delta3 + eps_H + d)", p.Delta_relax, relax, p.Delta_relax >= relax);
    add("wraparound", "tau_max > Delta_obs", Fixed::from_int(p.tau_max), p.Delta_obs,
        Fixed::from_int(p.tau_max) > p.Delta_obs);
    return l;
}

bool all_pass(const Ledger& l) {
    for (const auto& e : l)
        if (!e.pass) return false;
    return true;
}

namespace {

std::vector<std::pair<std::string, std::string>> fields(const ParamSet& p) {
    auto s = [](Fixed x) { return x.str(); };
    auto i = [](std::int64_t x) { return std::to_string(x); };
    std::ostringstream rho;
    rho << std::setprecision(17) << p.in.rho;
    return {
        {"n", i(p.n)},
        {"f", i(p.f)},
        {"d", s(p.d)},
        {"rho", rho.str()},
        {"theta", s(p.theta)},
        {"eps0", s(p.eps0)},
        {"eps0_bar", s(p.eps0_bar)},
        {"eps1", s(p.eps1)},
        {"eps1_bar", s(p.eps1_bar)},
        {"eps2", s(p.eps2)},
        {"delta1", s(p.delta1)},
        {"delta2", s(p.delta2)},
        {"eps_A", s(p.eps_A)},
        {"delta0", s(p.delta0)},
        {"T", i(p.T)},
        {"T_minus", s(p.T_minus)},
        {"T_plus", s(p.T_plus)},
        {"K_eps", i(p.K_eps)},
        {"K_rho", i(p.K_rho)},
        {"K_A", i(p.K_A)},
        {"eps_rho", s(p.eps_rho)},
        {"rho1", s(p.rho1)},
        {"Delta_A", s(p.Delta_A)},
        {"K_B", i(p.K_B)},
        {"eps_G", s(p.eps_G)},
        {"eps_B", s(p.eps_B)},
        {"delta_B", s(p.delta_B)},
        {"Delta_B", s(p.Delta_B)},
        {"Delta_G", s(p.Delta_G)},
        {"eps_H", s(p.eps_H)},
        {"delta3", s(p.delta3)},
        {"Delta_agr", s(p.Delta_agr)},
        {"Delta_rmv", s(p.Delta_rmv)},
        {"Delta_v", s(p.Delta_v)},
        {"Delta_stb", s(p.Delta_stb)},
        {"Delta1", s(p.Delta1)},
        {"Delta2", s(p.Delta2)},
        {"Delta3", s(p.Delta3)},
        {"Delta_relax", s(p.Delta_relax)},
        {"Delta0", s(p.Delta0)},
        {"Delta_c", s(p.Delta_c)},
        {"Delta_e", s(p.Delta_e)},
        {"Delta_obs", s(p.Delta_obs)},
        {"delta_eps", s(p.delta_eps)},
        {"tau_max", i(p.tau_max)},
        {"tick_slack", i(p.tick_slack)},
    };
}

}  // namespace

std::string ParamSet::digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : fields(*this)) {
        for (char c : k + "=" + v + ";") {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string format_params(const ParamSet& p, bool machine_readable) {
    auto fs = fields(p);
    if (machine_readable) {
        nlohmann::ordered_json j;
        for (const auto& [k, v] : fs) j[k] = v;
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    for (const auto& [k, v] : fs) os << std::left << std::setw(14) << k << v << "\n";
    return os.str();
}

std::string format_ledger(const Ledger& l, bool machine_readable) {
    if (machine_readable) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& e : l) {
            nlohmann::ordered_json j;
            j["name"] = e.name;
            j["relation"] = e.relation;
            j["lhs"] = e.lhs.str();
            j["rhs"] = e.rhs.str();
            j["pass"] = e.pass;
            arr.push_back(j);
        }
        return arr.dump(2) + "\n";
    }
    std::ostringstream os;
    for (const auto& e : l) {
        os << (e.pass ? "ok   " : "FAIL ") << std::left << std::setw(22) << e.name << std::setw(64) << e.relation
           << e.lhs.str() << " vs " << e.rhs.str() << "\n";
    }
    return os.str();
}

}  // namespace pss
