#include "pss/adversary.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace pss {

Fixed draw_fixed(Rng& r, Fixed lo, Fixed hi) {
    if (hi <= lo) return lo;
    return lo + Fixed::from_raw(static_cast<std::int64_t>(draw_below(r, static_cast<std::uint64_t>((hi - lo).raw()))));
}

std::vector<int> Adversary::choose_faulty(int n, int f, Rng& rng) {
    std::vector<int> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(ids[static_cast<std::size_t>(i)], ids[draw_below(rng, i + 1)]);
    ids.resize(static_cast<std::size_t>(f));
    std::sort(ids.begin(), ids.end());
    return ids;
}

Fixed Adversary::delay(const Message&, const ParamSet& p, Rng& rng) { return draw_fixed(rng, Fixed{}, p.d); }

namespace {

Payload random_payload(Rng& rng, const ParamSet& p) {
    switch (draw_below(rng, 5)) {
        case 0: return Payload::make_mark(static_cast<MarkValue>(draw_below(rng, 4)));
        case 1: return Payload::initiator(static_cast<int>(draw_below(rng, p.n)));
        case 2: return Payload::support(static_cast<int>(draw_below(rng, p.n)));
        case 3: return Payload::confirm(static_cast<int>(draw_below(rng, p.n)));
        default:
            return Payload::ba(static_cast<int>(draw_below(rng, p.n)), 1 + static_cast<int>(draw_below(rng, p.K_B)),
                               static_cast<int>(draw_below(rng, 2)));
    }
}

class Benign : public Adversary {
public:
    std::string name() const override { return "benign"; }
    std::vector<int> choose_faulty(int, int, Rng&) override { return {}; }
};

class Crash : public Adversary {
public:
    explicit Crash(std::optional<Fixed> at) : at_(at) {}
    std::string name() const override { return "crash"; }
    void prepare(const ParamSet& p, const std::vector<bool>&, Rng& rng) override {
        if (!at_) at_ = draw_fixed(rng, Fixed{}, p.Delta_c);
    }
    bool honest(int, Fixed t) const override { return t < *at_; }

private:
    std::optional<Fixed> at_;
};

class RandomByz : public Adversary {
public:
    explicit RandomByz(std::uint64_t one_in) : one_in_(one_in) {}
    std::string name() const override { return "random"; }
    void on_faulty_tick(int node, ByzApi& api) override {
        Rng& rng = *api.rng;
        if (!draw_chance(rng, one_in_)) return;
        Payload base = random_payload(rng, *api.params);
        for (int r = 0; r < api.n(); ++r) {
            if (draw_chance(rng, 3)) continue;  // some recipients get nothing
            Payload pl = base;
            if (pl.type == MsgType::Mark) pl.mark = static_cast<MarkValue>(draw_below(rng, 4));
            if (pl.type == MsgType::BA) pl.bit = static_cast<int>(draw_below(rng, 2));
            api.emit(node, r, pl, draw_fixed(rng, Fixed{}, api.params->d));
        }
    }

private:
    std::uint64_t one_in_;
};

// Rushes on nonfaulty pulses: best-tagged marks to one half of the nonfaulty
// nodes, nothing to the other half; nonfaulty traffic gets extremal delays.
class SplitWorld : public Adversary {
public:
    std::string name() const override { return "split-world"; }
    void prepare(const ParamSet& p, const std::vector<bool>& faulty, Rng&) override {
        std::vector<int> good;
        for (int i = 0; i < p.n; ++i)
            if (!faulty[static_cast<std::size_t>(i)]) good.push_back(i);
        near_.assign(static_cast<std::size_t>(p.n), false);
        for (std::size_t i = 0; i < good.size() / 2; ++i) near_[static_cast<std::size_t>(good[i])] = true;
    }
    Fixed delay(const Message& m, const ParamSet& p, Rng&) override {
        auto r = static_cast<std::size_t>(m.receiver);
        return r < near_.size() && near_[r] ? Fixed{} : p.d - Fixed::from_raw(1);
    }
    bool wants_records() const override { return true; }
    void observe(const EventRecord& r, ByzApi& api) override {
        if (r.kind != Kind::P || api.is_faulty(r.node)) return;
        for (int b = 0; b < api.n(); ++b) {
            if (!api.is_faulty(b)) continue;
            for (int q = 0; q < api.n(); ++q)
                if (near_[static_cast<std::size_t>(q)]) api.emit(b, q, Payload::make_mark(GOOD | BEST), Fixed{});
        }
    }

private:
    std::vector<bool> near_;
};

class DelayMax : public Adversary {
public:
    std::string name() const override { return "delay-max"; }
    Fixed delay(const Message&, const ParamSet& p, Rng&) override { return p.d - Fixed::from_raw(1); }
};

// Periodic best-tagged marks plus Initiators for itself.
class EngageSpammer : public Adversary {
public:
    EngageSpammer(std::int64_t mark_every, std::int64_t init_every) : mark_every_(mark_every), init_every_(init_every) {}
    std::string name() const override { return "engage-spammer"; }
    void on_faulty_tick(int node, ByzApi& api) override {
        std::int64_t k = api.now.floor_int();
        Rng& rng = *api.rng;
        if (k % mark_every_ == 0)
            for (int r = 0; r < api.n(); ++r)
                api.emit(node, r, Payload::make_mark(GOOD | BEST), draw_fixed(rng, Fixed{}, api.params->d));
        if (k % init_every_ == 0)
            for (int r = 0; r < api.n(); ++r)
                api.emit(node, r, Payload::initiator(node), draw_fixed(rng, Fixed{}, api.params->d));
    }

private:
    std::int64_t mark_every_, init_every_;
};

std::int64_t opt_int(const std::map<std::string, std::string>& o, const std::string& k, std::int64_t def) {
    auto it = o.find(k);
    if (it == o.end()) return def;
    std::size_t pos = 0;
    std::int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size() || v <= 0) throw std::invalid_argument("bad value for " + k);
    return v;
}

}  // namespace

const std::vector<std::string>& adversary_names() {
    static const std::vector<std::string> names{"benign", "crash", "random", "split-world", "delay-max",
                                                "engage-spammer"};
    return names;
}

std::unique_ptr<Adversary> make_adversary(const std::string& name, const std::map<std::string, std::string>& opts) {
    if (name == "benign") return std::make_unique<Benign>();
    if (name == "crash") {
        std::optional<Fixed> at;
        if (auto it = opts.find("crash_time"); it != opts.end()) at = Fixed::parse(it->second);
        return std::make_unique<Crash>(at);
    }
    if (name == "random") return std::make_unique<RandomByz>(static_cast<std::uint64_t>(opt_int(opts, "byz_one_in", 8)));
    if (name == "split-world") return std::make_unique<SplitWorld>();
    if (name == "delay-max") return std::make_unique<DelayMax>();
    if (name == "engage-spammer")
        return std::make_unique<EngageSpammer>(opt_int(opts, "spam_mark_every", 5), opt_int(opts, "spam_init_every", 20));
    throw std::invalid_argument("unknown adversary '" + name + "'");
}

}  // namespace pss
