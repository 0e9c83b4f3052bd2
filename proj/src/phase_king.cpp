#include "pss/phase_king.hpp"

#include <stdexcept>

namespace pss {

PhaseKing::PhaseKing(int n, int f, int self, int input) : n_(n), f_(f), self_(self), x_(input ? 1 : 0) {
    if (n <= 3 * f) throw std::invalid_argument("phase king needs n > 3f");
}

std::optional<int> PhaseKing::outgoing(int round) const {
    switch ((round - 1) % 3) {
        case 0: return x_;
        case 1:
            if (propose_ >= 0) return propose_;
            return std::nullopt;
        default:
            if (king_of_round(round) == self_) return x_;
            return std::nullopt;
    }
}

void PhaseKing::receive(int round, const std::vector<int>& bits) {
    int c[2] = {0, 0};
    for (int b : bits)
        if (b == 0 || b == 1) ++c[b];
    switch ((round - 1) % 3) {
        case 0:
            propose_ = c[1] >= n_ - f_ ? 1 : (c[0] >= n_ - f_ ? 0 : -1);
            break;
        case 1:
            if (c[1] > f_) x_ = 1;
            else if (c[0] > f_) x_ = 0;
            strong_ = c[x_] >= n_ - f_;
            break;
        default: {
            int k = king_of_round(round);
            if (!strong_ && k < static_cast<int>(bits.size()) && (bits[k] == 0 || bits[k] == 1)) x_ = bits[k];
            propose_ = -1;
            strong_ = false;
            break;
        }
    }
    last_round_ = round;
}

PhaseKing2::PhaseKing2(int n, int f, int self, int input) : n_(n), f_(f), self_(self), x_(input ? 1 : 0) {}

std::optional<int> PhaseKing2::outgoing(int round) const {
    if ((round - 1) % 2 == 0) return x_;
    if ((round - 1) / 2 == self_) return maj_;
    return std::nullopt;
}

void PhaseKing2::receive(int round, const std::vector<int>& bits) {
    if ((round - 1) % 2 == 0) {
        int c[2] = {0, 0};
        for (int b : bits)
            if (b == 0 || b == 1) ++c[b];
        maj_ = c[1] > c[0] ? 1 : 0;
        mult_ = c[maj_];
        return;
    }
    int k = (round - 1) / 2;
    if (mult_ >= n_ - f_) {
        x_ = maj_;
    } else if (k < static_cast<int>(bits.size()) && (bits[k] == 0 || bits[k] == 1)) {
        x_ = bits[k];
    } else {
        x_ = maj_;
    }
}

}  // namespace pss
