#pragma once

#include <optional>
#include <vector>

namespace pss {

// Deterministic phase-king agreement for n > 3f with f+1 phases of three
// rounds each (value, propose, king). Kings are nodes 0..f in phase order.
// Received bits are passed per sender, -1 meaning nothing arrived.
class PhaseKing {
public:
    PhaseKing(int n, int f, int self, int input);

    static int rounds_for(int f) { return 3 * (f + 1); }
    int rounds() const { return rounds_for(f_); }
    static int king_of_round(int r) { return (r - 1) / 3; }

    std::optional<int> outgoing(int round) const;
    void receive(int round, const std::vector<int>& bits);
    int value() const { return x_; }
    bool done() const { return last_round_ >= rounds(); }

    // Local state, exposed for state-space searches.
    struct State {
        int x;
        int propose;  // -1 none
        bool strong;
        friend bool operator==(const State&, const State&) = default;
        friend auto operator<=>(const State&, const State&) = default;
    };
    State state() const { return State{x_, propose_, strong_}; }
    void set_state(const State& s) {
        x_ = s.x;
        propose_ = s.propose;
        strong_ = s.strong;
    }
    void set_round(int r) { last_round_ = r; }

private:
    int n_, f_, self_;
    int x_;
    int propose_ = -1;
    bool strong_ = false;
    int last_round_ = 0;
};

// Two rounds per phase (value exchange, then king broadcast with adoption
// threshold n - f). Kept for comparison: it is not safe when n <= 4f.
class PhaseKing2 {
public:
    PhaseKing2(int n, int f, int self, int input);

    static int rounds_for(int f) { return 2 * (f + 1); }
    int rounds() const { return rounds_for(f_); }

    std::optional<int> outgoing(int round) const;
    void receive(int round, const std::vector<int>& bits);
    int value() const { return x_; }

    struct State {
        int x;
        int maj;
        int mult;
        friend bool operator==(const State&, const State&) = default;
        friend auto operator<=>(const State&, const State&) = default;
    };
    State state() const { return State{x_, maj_, mult_}; }
    void set_state(const State& s) {
        x_ = s.x;
        maj_ = s.maj;
        mult_ = s.mult;
    }

private:
    int n_, f_, self_;
    int x_;
    int maj_ = 0;
    int mult_ = 0;
};

}  // namespace pss
