#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pss/fixed.hpp"
#include "pss/network.hpp"
#include "pss/params.hpp"
#include "pss/trace.hpp"

namespace pss {

using Rng = std::mt19937_64;

// Portable draws (distribution objects differ across standard libraries).
inline std::uint64_t draw_below(Rng& r, std::uint64_t n) { return n == 0 ? 0 : r() % n; }
inline bool draw_chance(Rng& r, std::uint64_t one_in) { return draw_below(r, one_in) == 0; }
Fixed draw_fixed(Rng& r, Fixed lo, Fixed hi);  // uniform raw value in [lo, hi)

// What a faulty node may do right now.
struct ByzApi {
    Fixed now;
    const ParamSet* params = nullptr;
    const std::vector<bool>* faulty = nullptr;
    Rng* rng = nullptr;
    // Returns false when the rate cap drops the message.
    std::function<bool(int sender, int receiver, const Payload& p, Fixed delay)> emit;

    int n() const { return params->n; }
    bool is_faulty(int i) const { return (*faulty)[static_cast<std::size_t>(i)]; }
    Fixed max_delay() const { return params->d - Fixed::from_raw(1); }
};

class Adversary {
public:
    virtual ~Adversary() = default;
    virtual std::string name() const = 0;
    virtual std::vector<int> choose_faulty(int n, int f, Rng& rng);
    virtual Fixed delay(const Message& m, const ParamSet& p, Rng& rng);
    // Faulty node still runs the protocol at t (crash faults).
    virtual bool honest(int /*node*/, Fixed /*t*/) const { return false; }
    // Once per reference unit for every faulty node not running honestly.
    virtual void on_faulty_tick(int /*node*/, ByzApi& /*api*/) {}
    // Rushing: sees every record as it is produced.
    virtual bool wants_records() const { return false; }
    virtual void observe(const EventRecord& /*r*/, ByzApi& /*api*/) {}
    virtual void prepare(const ParamSet& /*p*/, const std::vector<bool>& /*faulty*/, Rng& /*rng*/) {}
};

// The built-in library: benign, crash, random, split-world, delay-max, engage-spammer.
const std::vector<std::string>& adversary_names();
// Throws std::invalid_argument on an unknown name or option.
std::unique_ptr<Adversary> make_adversary(const std::string& name, const std::map<std::string, std::string>& opts);

}  // namespace pss
