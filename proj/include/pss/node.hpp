#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pss/engine.hpp"
#include "pss/iaccept.hpp"
#include "pss/local_time.hpp"
#include "pss/network.hpp"
#include "pss/params.hpp"
#include "pss/phase_king.hpp"
#include "pss/trace.hpp"
#include "pss/trails.hpp"

namespace pss {

// Fault-tolerant midpoint over a single-valued trail. Offsets are taken
// against tau0 = now - span; sources with other than one mark are ignored.
// Empty when at most f offsets remain.
std::optional<LocalTime> ft_average(const std::vector<TickMark>& psi, int n, int f, LocalTime now, std::int64_t span,
                                    std::int64_t tau_max);

// Marks of `sel` whose age is at most `window`.
std::vector<TickMark> window_view(const Trail& t, Selector sel, Fixed window, LocalTime now);

// What a node needs from the world. Times are implicit (the current instant).
class NodeEnv {
public:
    virtual ~NodeEnv() = default;
    virtual void distribute(int node, const Payload& p) = 0;
    // Runs fn right after the node's k-th tick from now (k >= 1).
    virtual void after_ticks(int node, std::int64_t k, Engine::Group g, std::function<void()> fn) = 0;
    virtual void cancel_group(Engine::Group g) = 0;
    virtual void record(int node, Kind k, std::int64_t a = 0, std::int64_t b = 0, std::int64_t c = 0,
                        std::int64_t x = 0) = 0;
    virtual void diag(int node, const std::string& msg) = 0;
};

// Arbitrary starting state of one node.
struct NodeInit {
    LocalTime tau = 0;
    LocalTime tau_sch = 0;
    int k_A = 0;
    std::int64_t v_left = 0;
    std::int64_t relax_left = 0;
    std::int64_t blank_left = 0;
    std::optional<LocalTime> prev_pulse;
    std::vector<Mark> trail;
};

struct NodeOptions {
    bool gate = true;  // I-Accept estimate gate
};

class Node {
public:
    Node(const ParamSet& p, int id, NodeEnv& env, Engine::Group group_base, const NodeOptions& opt = {});

    void init(const NodeInit& s);
    void on_tick();
    void on_message(const Message& m);

    int id() const { return id_; }
    LocalTime tau() const { return tau_; }
    LocalTime tau_sch() const { return tau_sch_; }
    int k_A() const { return k_A_; }
    bool is_best() const { return is_best_; }
    bool is_happy() const { return is_happy_; }
    bool engage_live() const { return engage_live_; }
    // Bit 0: happy, bit 1: best. Carried by C and R records.
    std::int64_t flags() const { return (is_happy_ ? 1 : 0) | (is_best_ ? 2 : 0); }
    const Trail& trail() const { return trail_; }
    bool v_closed() const { return v_left_ == 0; }
    bool relax_closed() const { return relax_left_ == 0; }
    bool bprime_live(int g) const { return binst_.at(static_cast<std::size_t>(g)).live; }

    // Exposed for targeted tests of the emergency path.
    void help();
    void on_i_accepted(int g, Fixed t0);
    void on_i_accepted(int g, std::int64_t tau0) { on_i_accepted(g, Fixed::from_int(tau0)); }
    void appearance(int g);

private:
    // bunny
    void clamp();
    void observe();
    void pulse();
    void start_engage();
    void absorb_fire(LocalTime pulse_tick);
    void engage_adjust();

    // hoppelpopp
    void on_initiator(int g);
    void handle_ia(int g, const IAccept::Action& a);
    void start_bprime(int g, int input, bool silent);
    void bprime_begin(int g, std::uint64_t epoch);
    void bprime_step(int g, int k, std::uint64_t epoch);
    void bprime_send(int g, int round);
    void on_ba(const Message& m);

    Engine::Group absorb_group() const { return group_base_; }
    Engine::Group engage_group() const { return group_base_ + 1; }
    Engine::Group b_group(int g) const { return group_base_ + 2 + static_cast<Engine::Group>(g); }

    const ParamSet& p_;
    int id_;
    NodeEnv& env_;
    Engine::Group group_base_;

    LocalTime tau_ = 0;
    LocalTime tau_sch_ = 0;
    int k_A_ = 0;
    bool is_best_ = false;
    bool is_happy_ = false;
    bool engage_live_ = false;
    std::optional<LocalTime> last_pulse_;
    Trail trail_;
    std::uint64_t last_l1_seq_ = 0;
    std::uint64_t last_l2_seq_ = 0;

    std::int64_t ticks_ = 0;  // monotone tick count, never wraps
    std::int64_t v_left_ = 0;
    std::int64_t relax_left_ = 0;
    std::int64_t v_len_, relax_len_, blank_len_;

    IAccept ia_;
    struct BInstance {
        bool live = false;
        bool silent = false;
        std::uint64_t epoch = 0;
        int processed = 0;
        std::optional<PhaseKing> king;
        std::map<int, std::vector<int>> inbox;
    };
    std::vector<BInstance> binst_;
};

}  // namespace pss
