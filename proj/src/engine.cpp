#include "pss/engine.hpp"

#include <stdexcept>

namespace pss {

Engine::EventId Engine::schedule(Fixed t, int node, Rank rank, Handler h, Group group) {
    if (t < now_) throw std::invalid_argument("cannot schedule at " + t.str() + " before now " + now_.str());
    EventId id = ++seq_;
    std::uint64_t gen = 0;
    if (group != 0) gen = generation_[group];
    queue_.push(Entry{t, node, rank, id, id, group, gen});
    live_.emplace(id, Live{std::move(h), group, gen});
    return id;
}

void Engine::cancel(EventId id) { live_.erase(id); }

bool Engine::pending(EventId id) const {
    auto it = live_.find(id);
    if (it == live_.end()) return false;
    if (it->second.group == 0) return true;
    auto g = generation_.find(it->second.group);
    return g == generation_.end() || g->second == it->second.gen;
}

void Engine::cancel_group(Group g) {
    if (g != 0) ++generation_[g];
}

std::uint64_t Engine::run_until(Fixed horizon) {
    std::uint64_t fired = 0;
    while (!queue_.empty() && queue_.top().t <= horizon) {
        Entry e = queue_.top();
        queue_.pop();
        auto it = live_.find(e.id);
        if (it == live_.end()) continue;
        Handler h = std::move(it->second.h);
        live_.erase(it);
        if (e.group != 0 && generation_[e.group] != e.gen) continue;
        now_ = e.t;
        h();
        ++fired;
    }
    if (now_ < horizon) now_ = horizon;
    return fired;
}

}  // namespace pss
