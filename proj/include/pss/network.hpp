#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pss/engine.hpp"
#include "pss/fixed.hpp"
#include "pss/trace.hpp"

namespace pss {

enum MarkBit : std::uint8_t { GOOD = 1, BEST = 2 };
using MarkValue = std::uint8_t;  // subset of {GOOD, BEST}

std::string mark_name(MarkValue v);

struct Payload {
    MsgType type = MsgType::Mark;
    MarkValue mark = 0;
    int general = -1;
    int round = 0;
    int bit = 0;

    static Payload make_mark(MarkValue v) { return Payload{MsgType::Mark, v, -1, 0, 0}; }
    static Payload initiator(int g) { return Payload{MsgType::Initiator, 0, g, 0, 0}; }
    static Payload support(int g) { return Payload{MsgType::Support, 0, g, 0, 0}; }
    static Payload confirm(int g) { return Payload{MsgType::Confirm, 0, g, 0, 0}; }
    static Payload ba(int g, int round, int bit) { return Payload{MsgType::BA, 0, g, round, bit}; }

    friend bool operator==(const Payload&, const Payload&) = default;
};

// True iff the payload belongs to the wire alphabet for n nodes and K_B rounds.
bool valid_payload(const Payload& p, int n, int K_B);

struct Message {
    int sender = 0;
    int receiver = 0;
    Fixed sent;
    Payload payload;
};

// Bounded-delay fully connected network. Delays come from an oracle and must
// lie in [0, d); the network rejects anything else.
class Network {
public:
    using DelayOracle = std::function<Fixed(const Message&)>;
    using DeliverFn = std::function<void(const Message&)>;
    using SendHook = std::function<void(const Message&, bool faulty)>;

    Network(Engine& engine, int n, int K_B, Fixed d, DelayOracle delay, DeliverFn deliver);

    void set_send_hook(SendHook h) { send_hook_ = std::move(h); }
    int n() const { return n_; }
    Fixed d() const { return d_; }

    // Same value to every node, including the sender.
    void distribute(int sender, const Payload& value);

    // Faulty emission to one recipient. Rejects out-of-alphabet payloads
    // (std::invalid_argument). Returns false when dropped by the rate cap:
    // one message per (sender, type, recipient) per sender tick.
    bool byzantine_emit(int sender, int receiver, const Payload& value, Fixed delay, std::int64_t sender_tick);

    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t capped() const { return capped_; }

private:
    void deliver_after(const Message& m, Fixed delay);

    Engine& engine_;
    int n_;
    int K_B_;
    Fixed d_;
    DelayOracle delay_;
    DeliverFn deliver_;
    SendHook send_hook_;
    std::map<std::tuple<int, int, int>, std::int64_t> last_emit_tick_;
    std::uint64_t delivered_ = 0;
    std::uint64_t capped_ = 0;
};

}  // namespace pss
