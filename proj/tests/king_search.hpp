#pragma once

// Exhaustive search over per-round Byzantine bit assignments (0, 1 or
// silence to each honest recipient) for the phase-king variants. Honest
// local states are merged per round, so the search is over reachable state
// tuples instead of adversary strategies.

#include <set>
#include <string>
#include <vector>

#include "pss/phase_king.hpp"

namespace kingsearch {

struct Outcome {
    long tuples = 0;         // terminal state tuples examined
    long counterexamples = 0;
    std::string first;       // description of one violating execution
};

template <class King>
Outcome search(int n, int f) {
    Outcome out;
    using State = typename King::State;
    int rounds = King::rounds_for(f);
    for (int byz = 0; byz < n; ++byz) {
        std::vector<int> honest;
        for (int i = 0; i < n; ++i)
            if (i != byz) honest.push_back(i);
        const int h = static_cast<int>(honest.size());
        for (int mask = 0; mask < (1 << h); ++mask) {
            std::set<std::vector<State>> frontier;
            {
                std::vector<State> s;
                for (int j = 0; j < h; ++j) s.push_back(King(n, f, honest[j], (mask >> j) & 1).state());
                frontier.insert(s);
            }
            int combos = 1;
            for (int j = 0; j < h; ++j) combos *= 3;
            for (int r = 1; r <= rounds; ++r) {
                std::set<std::vector<State>> next;
                for (const auto& tup : frontier) {
                    std::vector<King> ks;
                    std::vector<int> sent(static_cast<std::size_t>(n), -1);
                    for (int j = 0; j < h; ++j) {
                        ks.emplace_back(n, f, honest[j], 0);
                        ks.back().set_state(tup[j]);
                        auto o = ks.back().outgoing(r);
                        sent[honest[j]] = o ? *o : -1;
                    }
                    for (int c = 0; c < combos; ++c) {
                        std::vector<State> res;
                        int code = c;
                        for (int j = 0; j < h; ++j) {
                            auto bits = sent;
                            bits[byz] = code % 3 - 1;
                            code /= 3;
                            King k = ks[j];
                            k.receive(r, bits);
                            res.push_back(k.state());
                        }
                        next.insert(res);
                    }
                }
                frontier = std::move(next);
            }
            bool same_input = mask == 0 || mask == (1 << h) - 1;
            int want = mask ? 1 : 0;
            for (const auto& tup : frontier) {
                ++out.tuples;
                bool agree = true, valid = true;
                for (const auto& s : tup) {
                    agree = agree && s.x == tup[0].x;
                    if (same_input) valid = valid && s.x == want;
                }
                if (!agree || !valid) {
                    if (out.counterexamples++ == 0) {
                        out.first = "faulty node " + std::to_string(byz) + ", honest inputs";
                        for (int j = 0; j < h; ++j) out.first += " " + std::to_string((mask >> j) & 1);
                        out.first += " -> outputs";
                        for (const auto& s : tup) out.first += " " + std::to_string(s.x);
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace kingsearch
