#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "pss/fixed.hpp"

namespace pss {

// Tie-break ranks for events of one node at one instant.
enum class Rank : std::uint8_t { Tick = 0, Deliver = 1, Continuation = 2 };

// Deterministic discrete-event queue. Events at equal instants fire in
// (node, rank, sequence) order.
class Engine {
public:
    using Handler = std::function<void()>;
    using EventId = std::uint64_t;
    using Group = std::uint64_t;  // 0 means "no group"

    Fixed now() const { return now_; }

    // Throws std::invalid_argument when t is in the past.
    EventId schedule(Fixed t, int node, Rank rank, Handler h, Group group = 0);
    void cancel(EventId id);
    // Cancels every event currently scheduled in the group.
    void cancel_group(Group g);
    bool pending(EventId id) const;

    // Fires every event with time <= horizon. Returns the number fired.
    std::uint64_t run_until(Fixed horizon);

private:
    struct Entry {
        Fixed t;
        int node;
        Rank rank;
        std::uint64_t seq;
        EventId id;
        Group group;
        std::uint64_t gen;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.t != b.t) return a.t > b.t;
            if (a.node != b.node) return a.node > b.node;
            if (a.rank != b.rank) return a.rank > b.rank;
            return a.seq > b.seq;
        }
    };

    Fixed now_;
    std::uint64_t seq_ = 0;
    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    struct Live {
        Handler h;
        Group group;
        std::uint64_t gen;
    };
    std::unordered_map<EventId, Live> live_;
    std::unordered_map<Group, std::uint64_t> generation_;
};

}  // namespace pss
