#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pss/adversary.hpp"
#include "pss/checker.hpp"
#include "pss/params.hpp"
#include "pss/sim.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool machine = false;
    std::vector<std::string> sets;
};

void add_common(CLI::App* sc, Common& c) {
    sc->add_option("--config", c.config, "scenario file (key=value lines)");
    sc->add_option("--seed", c.seed, "override the config seed");
    sc->add_option("--out", c.out, "output location");
    sc->add_flag("--machine-readable", c.machine, "JSON output");
    sc->add_option("--set", c.sets, "extra key=value applied after the config file");
}

pss::ScenarioConfig load(const Common& c) {
    std::string text;
    if (!c.config.empty()) {
        std::ifstream f(c.config);
        if (!f) throw pss::ConfigError("cannot read config '" + c.config + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        text = ss.str() + "\n";
    }
    for (const auto& s : c.sets) text += s + "\n";
    auto cfg = pss::parse_config(text);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

double messages_per_cycle(const pss::SyncReport& r) {
    std::int64_t sends = 0, pulses = 0;
    for (const auto& a : r.audit) {
        sends += a.mark_sends + a.other_sends;
        pulses += a.pulses;
    }
    return pulses ? static_cast<double>(sends) / static_cast<double>(pulses) : 0.0;
}

bool within_bound(const pss::SyncReport& r) { return r.t_star && *r.t_star <= r.bound; }

int cmd_run(const Common& c) {
    auto cfg = load(c);
    auto res = pss::run(cfg);
    auto rep = pss::check_trace(res.trace, res.params, cfg.horizon_override);
    fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    fs::create_directories(dir);
    {
        std::ofstream t(dir / "trace.txt");
        res.trace.write(t);
    }
    {
        std::ofstream j(dir / "report.json");
        j << pss::format_report(rep, true);
    }
    for (const auto& m : res.trace.diagnostics)
        if (m.rfind("warning", 0) == 0) std::cerr << m << "\n";
    std::cout << pss::format_report(rep, c.machine);
    return within_bound(rep) ? 0 : 1;
}

// "a..b", "a-b" or a single seed; b < a is an empty range
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> out;
    auto sep = s.find("..");
    std::size_t skip = 2;
    if (sep == std::string::npos) {
        sep = s.find('-');
        skip = 1;
    }
    try {
        if (sep == std::string::npos) {
            out.push_back(std::stoull(s));
            return out;
        }
        std::uint64_t a = std::stoull(s.substr(0, sep)), b = std::stoull(s.substr(sep + skip));
        for (std::uint64_t x = a; x <= b && b >= a; ++x) out.push_back(x);
    } catch (const std::logic_error&) {
        throw pss::ConfigError("bad seed range '" + s + "'");
    }
    return out;
}

struct Row {
    std::uint64_t seed = 0;
    std::string adversary;
    pss::SyncReport rep;
    std::string error;
    bool ok() const {
        bool audit = std::all_of(rep.audit.begin(), rep.audit.end(), [](const pss::NodeAudit& a) { return a.ok(); });
        return error.empty() && within_bound(rep) && rep.synchronized && rep.peaceful && audit &&
               rep.emergency.ok() && rep.clock.agree && rep.clock.advances;
    }
};

int cmd_sweep(const Common& c, const std::string& seeds, std::vector<std::string> advs, unsigned jobs) {
    auto base = load(c);
    auto list = parse_seeds(seeds);
    if (advs.empty()) advs = pss::adversary_names();
    for (const auto& a : advs)
        if (std::find(pss::adversary_names().begin(), pss::adversary_names().end(), a) == pss::adversary_names().end())
            throw pss::ConfigError("unknown adversary '" + a + "'");
    pss::solve(base.params);  // reject bad parameters before spawning anything

    std::vector<Row> rows;
    for (auto s : list)
        for (const auto& a : advs) rows.push_back(Row{s, a, {}, {}});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < rows.size();) {
            auto cfg = base;
            cfg.seed = rows[i].seed;
            cfg.adversary = rows[i].adversary;
            try {
                auto res = pss::run(cfg);
                rows[i].rep = pss::check_trace(res.trace, res.params, cfg.horizon_override);
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < std::min<std::size_t>(jobs, rows.size()); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ofstream file;
    if (!c.out.empty()) file.open(c.out);
    std::ostream& os = c.out.empty() ? std::cout : file;
    os << "seed,adversary,stabilization_time,max_width,peaceful,messages_per_cycle,contraction,ok\n";
    bool all = true;
    pss::Fixed worst;
    pss::Fixed bound = pss::solve(base.params).Delta_c + pss::solve(base.params).Delta_e;
    for (const auto& r : rows) {
        all = all && r.ok();
        if (r.rep.t_star) worst = max(worst, *r.rep.t_star);
        std::ostringstream mpc;
        mpc.precision(4);
        mpc << std::fixed << messages_per_cycle(r.rep);
        os << r.seed << ',' << r.adversary << ',' << (r.rep.t_star ? r.rep.t_star->str() : "none") << ','
           << r.rep.precision.str() << ',' << (r.rep.peaceful ? 1 : 0) << ',' << mpc.str() << ','
           << (r.rep.contraction_ok ? 1 : 0) << ',' << (r.ok() ? "1" : "FAIL") << '\n';
        if (!r.error.empty()) std::cerr << "seed " << r.seed << " " << r.adversary << ": " << r.error << "\n";
    }
    if (!rows.empty())
        std::cerr << "max stabilization time " << worst.str() << " against bound " << bound.str()
                  << (worst <= bound ? " (within)" : " (EXCEEDED)") << "\n";
    return all ? 0 : 1;
}

int cmd_params(const Common& c, const CLI::App& sc, pss::ParamInputs flags) {
    auto in = c.config.empty() && c.sets.empty() ? pss::ParamInputs{} : load(c).params;
    auto pick = [&](const char* name, auto& dst, const auto& v) {
        if (sc.count(name)) dst = v;
    };
    pick("--d", in.d, flags.d);
    pick("--rho", in.rho, flags.rho);
    pick("--n", in.n, flags.n);
    pick("--f", in.f, flags.f);
    pick("--eps0", in.eps0, flags.eps0);
    pick("--K_A", in.K_A, flags.K_A);
    pick("--K_B", in.K_B, flags.K_B);
    pick("--T", in.T, flags.T);
    pick("--tick-slack", in.tick_slack, flags.tick_slack);
    pick("--mode", in.mode, flags.mode);
    auto p = pss::solve(in);
    auto l = pss::validate(p);
    if (c.machine) {
        nlohmann::ordered_json j;
        j["params"] = nlohmann::ordered_json::parse(pss::format_params(p, true));
        j["ledger"] = nlohmann::ordered_json::parse(pss::format_ledger(l, true));
        j["ok"] = pss::all_pass(l);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << pss::format_params(p, false) << "\n" << pss::format_ledger(l, false);
    }
    return pss::all_pass(l) ? 0 : 1;
}

int cmd_check(const Common& c, const std::string& path, bool allow_short) {
    std::ifstream f(path);
    if (!f) throw pss::ConfigError("cannot read trace '" + path + "'");
    auto tr = pss::ExecutionTrace::read(f);
    auto cfg = pss::config_from_meta(tr);
    auto p = pss::solve(cfg.params);
    auto rep = pss::check_trace(tr, p, allow_short || cfg.horizon_override);
    if (c.machine) {
        std::cout << pss::format_report(rep, true);
    } else {
        std::cout << pss::format_report(rep, true) << pss::format_report(rep, false);
    }
    return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pss: self-stabilizing pulse synchronization simulator"};
    app.require_subcommand(1);

    Common run_c, sweep_c, params_c, check_c;
    auto* run = app.add_subcommand("run", "simulate one scenario and check it");
    add_common(run, run_c);

    auto* sweep = app.add_subcommand("sweep", "seeds x adversaries metrics table (CSV)");
    add_common(sweep, sweep_c);
    std::string seeds = "1..20";
    std::vector<std::string> advs;
    unsigned jobs = 0;
    sweep->add_option("--seeds", seeds, "seed range a..b");
    sweep->add_option("--adversaries", advs, "adversary names")->delimiter(',');
    sweep->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    auto* params = app.add_subcommand("params", "print the parameter set and its ledger");
    add_common(params, params_c);
    pss::ParamInputs pf;
    std::string d = "1", eps0 = "3", mode = "general";
    params->add_option("--d", d);
    params->add_option("--rho", pf.rho);
    params->add_option("--n", pf.n);
    params->add_option("--f", pf.f);
    params->add_option("--eps0", eps0);
    params->add_option("--K_A", pf.K_A);
    params->add_option("--K_B", pf.K_B);
    params->add_option("--T", pf.T);
    params->add_option("--tick-slack", pf.tick_slack);
    params->add_option("--mode", mode)->check(CLI::IsMember({"simple", "general", "eventual"}));

    auto* check = app.add_subcommand("check", "check a recorded trace");
    add_common(check, check_c);
    std::string trace_path;
    bool allow_short = false;
    check->add_option("trace", trace_path, "trace file")->required();
    check->add_flag("--allow-short", allow_short, "accept horizons below the required minimum");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(run_c);
        if (*sweep) return cmd_sweep(sweep_c, seeds, advs, jobs);
        if (*params) {
            pf.d = pss::Fixed::parse(d);
            pf.eps0 = pss::Fixed::parse(eps0);
            pf.mode = mode == "simple" ? pss::HoppelpoppMode::simple
                      : mode == "eventual" ? pss::HoppelpoppMode::eventual
                                           : pss::HoppelpoppMode::general;
            return cmd_params(params_c, *params, pf);
        }
        if (*check) return cmd_check(check_c, trace_path, allow_short);
    } catch (const pss::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
