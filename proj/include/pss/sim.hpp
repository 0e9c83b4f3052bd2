#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pss/adversary.hpp"
#include "pss/fixed.hpp"
#include "pss/params.hpp"
#include "pss/trace.hpp"

namespace pss {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class InitMode { zeroed, uniform_random, adversarial_worst };
enum class DriftMode { constant, sinusoidal, extremal };

struct ScenarioConfig {
    ParamInputs params;
    std::optional<Fixed> horizon;  // unset selects the minimum horizon of the parameter set
    bool horizon_override = false;
    std::uint64_t seed = 1;
    std::string adversary = "benign";
    std::map<std::string, std::string> adversary_opts;
    InitMode init = InitMode::uniform_random;
    DriftMode drift = DriftMode::constant;
    bool gate = true;

    std::string to_text() const;  // round-trips through parse_config
    std::string digest() const;
};

// Flat key=value lines, '#' comments. Throws ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

const char* init_mode_name(InitMode m);
const char* drift_mode_name(DriftMode m);

struct RunResult {
    ExecutionTrace trace;
    ParamSet params;
    std::vector<int> faulty;
    Fixed horizon;
    std::uint64_t events = 0;
    std::uint64_t byz_capped = 0;
};

// Deterministic for a given config. Throws ConfigError on validation failures.
RunResult run(const ScenarioConfig& cfg);
// Same with a caller-supplied strategy in place of cfg.adversary (not replayable from metadata).
RunResult run(const ScenarioConfig& cfg, std::unique_ptr<Adversary> custom);

// Rebuilds the scenario stored in a trace's metadata.
ScenarioConfig config_from_meta(const ExecutionTrace& t);

// Faulty node ids recorded in a trace's metadata.
std::vector<bool> faulty_mask(const ExecutionTrace& t);

}  // namespace pss
