#include "pss/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "pss/adversary.hpp"
#include "pss/clock.hpp"
#include "pss/engine.hpp"
#include "pss/network.hpp"
#include "pss/node.hpp"

namespace pss {

const char* init_mode_name(InitMode m) {
    switch (m) {
        case InitMode::zeroed: return "zeroed";
        case InitMode::uniform_random: return "uniform-random";
        case InitMode::adversarial_worst: return "adversarial-worst";
    }
    return "?";
}

const char* drift_mode_name(DriftMode m) {
    switch (m) {
        case DriftMode::constant: return "constant";
        case DriftMode::sinusoidal: return "sinusoidal";
        case DriftMode::extremal: return "extremal";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::int64_t to_int(const std::string& k, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + k + "' expects an integer, got '" + v + "'");
    }
}

double to_double(const std::string& k, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + k + "' expects a number, got '" + v + "'");
    }
}

Fixed to_fixed(const std::string& k, const std::string& v) {
    try {
        return Fixed::parse(v);
    } catch (const std::exception&) {
        throw ConfigError("config: '" + k + "' expects a decimal, got '" + v + "'");
    }
}

bool to_bool(const std::string& k, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError("config: '" + k + "' expects a boolean, got '" + v + "'");
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const char* mode_name(HoppelpoppMode m) {
    switch (m) {
        case HoppelpoppMode::simple: return "simple";
        case HoppelpoppMode::general: return "general";
        case HoppelpoppMode::eventual: return "eventual";
    }
    return "?";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        auto& P = c.params;
        if (k == "n") P.n = static_cast<int>(to_int(k, v));
        else if (k == "f") P.f = static_cast<int>(to_int(k, v));
        else if (k == "d") P.d = to_fixed(k, v);
        else if (k == "rho") P.rho = to_double(k, v);
        else if (k == "eps0") P.eps0 = to_fixed(k, v);
        else if (k == "K_A") P.K_A = static_cast<int>(to_int(k, v));
        else if (k == "K_B") P.K_B = static_cast<int>(to_int(k, v));
        else if (k == "T") P.T = to_int(k, v);
        else if (k == "tau_max") P.tau_max = to_int(k, v);
        else if (k == "tick_slack") P.tick_slack = static_cast<int>(to_int(k, v));
        else if (k == "mode") {
            if (v == "simple") P.mode = HoppelpoppMode::simple;
            else if (v == "general") P.mode = HoppelpoppMode::general;
            else if (v == "eventual") P.mode = HoppelpoppMode::eventual;
            else throw ConfigError("config: unknown mode '" + v + "'");
        } else if (k == "horizon") c.horizon = to_fixed(k, v);
        else if (k == "horizon_override") c.horizon_override = to_bool(k, v);
        else if (k == "seed") c.seed = static_cast<std::uint64_t>(to_int(k, v));
        else if (k == "adversary") {
            bool known = false;
            for (const auto& a : adversary_names()) known = known || a == v;
            if (!known) throw ConfigError("config: unknown adversary '" + v + "'");
            c.adversary = v;
        } else if (k == "crash_time" || k == "byz_one_in" || k == "spam_mark_every" || k == "spam_init_every")
            c.adversary_opts[k] = v;
        else if (k == "init") {
            if (v == "zeroed") c.init = InitMode::zeroed;
            else if (v == "uniform-random") c.init = InitMode::uniform_random;
            else if (v == "adversarial-worst") c.init = InitMode::adversarial_worst;
            else throw ConfigError("config: unknown init mode '" + v + "'");
        } else if (k == "drift") {
            if (v == "constant") c.drift = DriftMode::constant;
            else if (v == "sinusoidal") c.drift = DriftMode::sinusoidal;
            else if (v == "extremal") c.drift = DriftMode::extremal;
            else throw ConfigError("config: unknown drift mode '" + v + "'");
        } else if (k == "gate") c.gate = to_bool(k, v);
        else throw ConfigError("config: unknown key '" + k + "'");
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string ScenarioConfig::to_text() const {
    std::ostringstream o;
    const auto& P = params;
    o << "n=" << P.n << "\nf=" << P.f << "\nd=" << P.d.str() << "\nrho=" << fmt_double(P.rho)
      << "\neps0=" << P.eps0.str() << "\nK_A=" << P.K_A << "\nK_B=" << P.K_B << "\nT=" << P.T
      << "\ntau_max=" << P.tau_max << "\ntick_slack=" << P.tick_slack << "\nmode=" << mode_name(P.mode) << "\n";
    if (horizon) o << "horizon=" << horizon->str() << "\n";
    o << "horizon_override=" << (horizon_override ? 1 : 0) << "\nseed=" << seed << "\nadversary=" << adversary
      << "\n";
    for (const auto& [k, v] : adversary_opts) o << k << "=" << v << "\n";
    o << "init=" << init_mode_name(init) << "\ndrift=" << drift_mode_name(drift) << "\ngate=" << (gate ? 1 : 0)
      << "\n";
    return o.str();
}

std::string ScenarioConfig::digest() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_text())));
    return buf;
}

ScenarioConfig config_from_meta(const ExecutionTrace& t) {
    std::string text;
    for (const auto& [k, v] : t.meta)
        if (k.rfind("cfg.", 0) == 0) text += k.substr(4) + "=" + v + "\n";
    return parse_config(text);
}

std::vector<bool> faulty_mask(const ExecutionTrace& t) {
    int n = 0;
    if (auto it = t.meta.find("n"); it != t.meta.end()) n = std::stoi(it->second);
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    auto it = t.meta.find("faulty");
    if (it == t.meta.end()) return mask;
    std::istringstream in(it->second);
    std::string tok;
    while (std::getline(in, tok, ','))
        if (!tok.empty()) {
            int i = std::stoi(tok);
            if (i >= 0 && i < n) mask[static_cast<std::size_t>(i)] = true;
        }
    return mask;
}

namespace {

class Simulation final : public NodeEnv {
public:
    Simulation(const ScenarioConfig& cfg, const ParamSet& p, Fixed horizon, std::unique_ptr<Adversary> custom)
        : cfg_(cfg), p_(p), horizon_(horizon), rng_(cfg.seed), delay_rng_(cfg.seed ^ 0x9e3779b97f4a7c15ull),
          byz_rng_(cfg.seed ^ 0xd1b54a32d192ed03ull) {
        if (custom) {
            adv_ = std::move(custom);
            return;
        }
        try {
            adv_ = make_adversary(cfg.adversary, cfg.adversary_opts);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    RunResult go() {
        int n = p_.n;
        faulty_.assign(static_cast<std::size_t>(n), false);
        auto F = adv_->choose_faulty(n, p_.f, rng_);
        if (static_cast<int>(F.size()) > p_.f) throw ConfigError("adversary chose more than f faulty nodes");
        for (int i : F) faulty_[static_cast<std::size_t>(i)] = true;
        adv_->prepare(p_, faulty_, rng_);

        net_ = std::make_unique<Network>(
            eng_, n, p_.K_B, p_.d, [this](const Message& m) { return adv_->delay(m, p_, delay_rng_); },
            [this](const Message& m) { deliver(m); });

        make_clocks();
        nodes_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            if (faulty_[static_cast<std::size_t>(i)] && !adv_->honest(i, Fixed{})) continue;
            NodeOptions opt;
            opt.gate = cfg_.gate;
            auto node = std::make_unique<Node>(p_, i, *this, 1 + static_cast<Engine::Group>(i) * (n + 2), opt);
            node->init(initial_state(i));
            nodes_[static_cast<std::size_t>(i)] = std::move(node);
            schedule_tick(i, 1);
        }
        for (int i : F) schedule_byz_tick(i, 0);
        seed_in_transit();

        RunResult r;
        r.events = eng_.run_until(horizon_);
        trace_.normalize();
        fill_meta(F);
        r.trace = std::move(trace_);
        r.params = p_;
        r.faulty = F;
        r.horizon = horizon_;
        r.byz_capped = net_->capped();
        return r;
    }

    void distribute(int node, const Payload& p) override { net_->distribute(node, p); }

    void after_ticks(int node, std::int64_t k, Engine::Group g, std::function<void()> fn) override {
        const ClockModel& c = clocks_[static_cast<std::size_t>(node)];
        std::int64_t at = c.ticks_upto(eng_.now()) + std::max<std::int64_t>(k, 1);
        eng_.schedule(c.tick_time(at), node, Rank::Continuation,
                      [this, node, fn = std::move(fn)] {
                          if (alive(node)) fn();
                      },
                      g);
    }

    void cancel_group(Engine::Group g) override { eng_.cancel_group(g); }

    void record(int node, Kind k, std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t x) override {
        trace_.records.push_back(EventRecord{eng_.now(), node, k, a, b, c, x});
        if (adv_->wants_records() && !faulty_[static_cast<std::size_t>(node)]) {
            EventRecord rec = trace_.records.back();
            ByzApi api = byz_api();
            adv_->observe(rec, api);
        }
    }

    void diag(int node, const std::string& msg) override {
        trace_.diagnostics.push_back("t=" + eng_.now().str() + " node=" + std::to_string(node) + " " + msg);
    }

private:
    bool alive(int i) const {
        if (!nodes_[static_cast<std::size_t>(i)]) return false;
        return !faulty_[static_cast<std::size_t>(i)] || adv_->honest(i, eng_.now());
    }

    ByzApi byz_api() {
        ByzApi api;
        api.now = eng_.now();
        api.params = &p_;
        api.faulty = &faulty_;
        api.rng = &byz_rng_;
        api.emit = [this](int s, int r, const Payload& pl, Fixed delay) {
            if (s < 0 || s >= p_.n || !faulty_[static_cast<std::size_t>(s)])
                throw std::logic_error("adversary emitted as nonfaulty node " + std::to_string(s));
            return net_->byzantine_emit(s, r, pl, delay, eng_.now().floor_int());
        };
        return api;
    }

    void make_clocks() {
        const std::int64_t den = 1000000;
        auto ppm = static_cast<std::int64_t>(std::floor(p_.in.rho * static_cast<double>(den)));
        for (int i = 0; i < p_.n; ++i) {
            Fixed phase = Fixed::from_raw(1 + static_cast<std::int64_t>(draw_below(rng_, Fixed::kOne)));
            LocalTime off = 0;
            switch (cfg_.drift) {
                case DriftMode::constant:
                    clocks_.push_back(ClockModel::constant(den + static_cast<std::int64_t>(draw_below(rng_, ppm + 1)),
                                                           den, off, p_.tau_max, phase));
                    break;
                case DriftMode::extremal:
                    clocks_.push_back(ClockModel::constant(den + (i % 2 ? ppm : 0), den, off, p_.tau_max, phase));
                    break;
                case DriftMode::sinusoidal: {
                    double amp = p_.in.rho * static_cast<double>(1 + draw_below(rng_, 1000)) / 1000.0;
                    double period = 50.0 + static_cast<double>(draw_below(rng_, 450));
                    double shift = 2.0 * std::numbers::pi * static_cast<double>(draw_below(rng_, 1000)) / 1000.0;
                    clocks_.push_back(ClockModel::sinusoidal(amp, period, shift, off, p_.tau_max, phase));
                    break;
                }
            }
        }
    }

    NodeInit initial_state(int i) {
        NodeInit s;
        auto tm = static_cast<std::uint64_t>(p_.tau_max);
        std::int64_t v_len = p_.Delta_v.ceil_int(), relax_len = p_.Delta_relax.ceil_int();
        std::int64_t window = observation_window_ticks(p_);
        switch (cfg_.init) {
            case InitMode::zeroed: break;
            case InitMode::uniform_random: {
                s.tau = static_cast<LocalTime>(draw_below(rng_, tm));
                s.tau_sch = static_cast<LocalTime>(draw_below(rng_, tm));
                s.k_A = static_cast<int>(draw_below(rng_, static_cast<std::uint64_t>(p_.K_A)));
                s.v_left = static_cast<std::int64_t>(draw_below(rng_, static_cast<std::uint64_t>(v_len + 1)));
                s.relax_left = static_cast<std::int64_t>(draw_below(rng_, static_cast<std::uint64_t>(relax_len + 1)));
                if (draw_chance(rng_, 2)) s.prev_pulse = static_cast<LocalTime>(draw_below(rng_, tm));
                auto count = draw_below(rng_, static_cast<std::uint64_t>(3 * p_.n + 1));
                for (std::uint64_t j = 0; j < count; ++j) {
                    Mark m;
                    m.source = static_cast<int>(draw_below(rng_, static_cast<std::uint64_t>(p_.n)));
                    m.value = static_cast<MarkValue>(draw_below(rng_, 4));
                    m.tick = s.tau - static_cast<LocalTime>(draw_below(rng_, static_cast<std::uint64_t>(window + 1)));
                    s.trail.push_back(m);
                }
                break;
            }
            case InitMode::adversarial_worst: {
                // Pulses spread over a whole period, counters disagreeing,
                // emergency timers fully armed and a stale happy trail.
                s.tau = static_cast<LocalTime>(draw_below(rng_, tm));
                s.tau_sch = s.tau + 1 + (p_.T * i) / p_.n;
                s.k_A = i % p_.K_A;
                s.v_left = v_len;
                s.relax_left = relax_len;
                s.prev_pulse = s.tau - p_.T / 2;
                for (int j = 0; j < p_.n; ++j) s.trail.push_back(Mark{GOOD | BEST, s.tau - 1, j, 0});
                break;
            }
        }
        return s;
    }

    // Arbitrary messages already in flight at time 0.
    void seed_in_transit() {
        if (cfg_.init == InitMode::zeroed) return;
        for (int s = 0; s < p_.n; ++s)
            for (int r = 0; r < p_.n; ++r) {
                if (!draw_chance(rng_, 2)) continue;
                Payload pl;
                switch (draw_below(rng_, 5)) {
                    case 0: pl = Payload::make_mark(static_cast<MarkValue>(draw_below(rng_, 4))); break;
                    case 1: pl = Payload::initiator(s); break;
                    case 2: pl = Payload::support(static_cast<int>(draw_below(rng_, p_.n))); break;
                    case 3: pl = Payload::confirm(static_cast<int>(draw_below(rng_, p_.n))); break;
                    default:
                        pl = Payload::ba(static_cast<int>(draw_below(rng_, p_.n)),
                                         1 + static_cast<int>(draw_below(rng_, p_.K_B)),
                                         static_cast<int>(draw_below(rng_, 2)));
                }
                Message m{s, r, Fixed{}, pl};
                eng_.schedule(draw_fixed(rng_, Fixed{}, p_.d), r, Rank::Deliver, [this, m] { deliver(m); });
            }
    }

    void deliver(const Message& m) {
        if (alive(m.receiver)) nodes_[static_cast<std::size_t>(m.receiver)]->on_message(m);
    }

    void schedule_tick(int i, std::int64_t k) {
        Fixed t = clocks_[static_cast<std::size_t>(i)].tick_time(k);
        if (t > horizon_) return;
        eng_.schedule(t, i, Rank::Tick, [this, i, k] {
            if (!alive(i)) return;
            nodes_[static_cast<std::size_t>(i)]->on_tick();
            schedule_tick(i, k + 1);
        });
    }

    void schedule_byz_tick(int i, std::int64_t k) {
        Fixed t = Fixed::from_int(k);
        if (t > horizon_) return;
        eng_.schedule(t, i, Rank::Tick, [this, i, k] {
            if (!adv_->honest(i, eng_.now())) {
                ByzApi api = byz_api();
                adv_->on_faulty_tick(i, api);
            }
            schedule_byz_tick(i, k + 1);
        });
    }

    void fill_meta(const std::vector<int>& F) {
        auto& m = trace_.meta;
        m["n"] = std::to_string(p_.n);
        m["f"] = std::to_string(p_.f);
        m["seed"] = std::to_string(cfg_.seed);
        m["params"] = p_.digest();
        std::string fs;
        for (int i : F) fs += (fs.empty() ? "" : ",") + std::to_string(i);
        m["faulty"] = fs;
        m["horizon"] = horizon_.str();
        m["adversary"] = cfg_.adversary;
        m["config"] = cfg_.digest();
        std::istringstream in(cfg_.to_text());
        std::string line;
        while (std::getline(in, line)) {
            auto eq = line.find('=');
            m["cfg." + line.substr(0, eq)] = line.substr(eq + 1);
        }
    }

    ScenarioConfig cfg_;
    ParamSet p_;
    Fixed horizon_;
    Rng rng_, delay_rng_, byz_rng_;
    std::unique_ptr<Adversary> adv_;
    Engine eng_;
    std::unique_ptr<Network> net_;
    std::vector<bool> faulty_;
    std::vector<ClockModel> clocks_;
    std::vector<std::unique_ptr<Node>> nodes_;
    ExecutionTrace trace_;
};

}  // namespace

RunResult run(const ScenarioConfig& cfg) { return run(cfg, nullptr); }

RunResult run(const ScenarioConfig& cfg, std::unique_ptr<Adversary> custom) {
    ParamSet p;
    try {
        p = solve(cfg.params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("parameters rejected: ") + e.what());
    }
    if (!all_pass(validate(p))) throw ConfigError("parameter ledger has failing relations");
    Fixed need = Fixed::from_int(p.horizon_min().ceil_int());
    Fixed horizon = need;
    std::string warning;
    if (cfg.horizon) {
        if (*cfg.horizon <= Fixed{}) throw ConfigError("horizon must be positive");
        if (*cfg.horizon < need) {
            if (!cfg.horizon_override)
                throw ConfigError("horizon " + cfg.horizon->str() + " below the minimum " + need.str() +
                                  " (set horizon_override=1)");
            warning = "warning: horizon " + cfg.horizon->str() + " below the minimum " + need.str();
        }
        horizon = *cfg.horizon;
    }
    Simulation sim(cfg, p, horizon, std::move(custom));
    RunResult r = sim.go();
    if (!warning.empty()) r.trace.diagnostics.insert(r.trace.diagnostics.begin(), warning);
    return r;
}

}  // namespace pss
