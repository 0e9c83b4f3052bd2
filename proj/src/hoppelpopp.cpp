#include "pss/node.hpp"

namespace pss {

void Node::help() {
    if (v_left_ != 0) return;
    env_.record(id_, Kind::G0, id_);
    env_.record(id_, Kind::S, static_cast<std::int64_t>(MsgType::Initiator), id_);
    v_left_ = v_len_;
    env_.distribute(id_, Payload::initiator(id_));
}

void Node::on_initiator(int g) {
    if (is_happy_ || relax_left_ != 0) return;
    env_.record(id_, Kind::G1, g);
    env_.record(id_, Kind::S, static_cast<std::int64_t>(MsgType::Support), g);
    env_.distribute(id_, Payload::support(g));
}

void Node::handle_ia(int g, const IAccept::Action& a) {
    if (a.confirm) {
        env_.record(id_, Kind::S, static_cast<std::int64_t>(MsgType::Confirm), g);
        env_.distribute(id_, Payload::confirm(g));
    }
    if (a.accept) {
        Fixed t0 = Fixed::from_int(ticks_) - a.est;
        env_.record(id_, Kind::G2, g, 0, t0.ceil_int());
        on_i_accepted(g, t0);
    }
}

void Node::on_i_accepted(int g, Fixed t0) {
    Fixed td = p_.theta_d();
    if (t0 <= 6 * td) {
        int c = (t0 <= 4 * td && relax_left_ == 0) ? 1 : 0;
        env_.record(id_, Kind::G3, g, c, t0.ceil_int());
        start_bprime(g, c, false);
    } else {
        start_bprime(g, 0, true);
    }
}

void Node::start_bprime(int g, int input, bool silent) {
    env_.cancel_group(b_group(g));
    BInstance& b = binst_.at(static_cast<std::size_t>(g));
    std::uint64_t epoch = b.epoch + 1;
    b = BInstance{};
    b.live = true;
    b.silent = silent;
    b.epoch = epoch;
    b.king.emplace(p_.n, p_.f, id_, input);
    // Quarantine: stragglers of a preempted predecessor drain before round 1.
    env_.after_ticks(id_, p_.delta_B.ceil_int(), b_group(g), [this, g, epoch] { bprime_begin(g, epoch); });
}

void Node::bprime_send(int g, int round) {
    BInstance& b = binst_.at(static_cast<std::size_t>(g));
    auto bit = b.king->outgoing(round);
    if (!bit) return;
    env_.record(id_, Kind::S, static_cast<std::int64_t>(MsgType::BA), g, round, *bit);
    env_.distribute(id_, Payload::ba(g, round, *bit));
}

void Node::bprime_begin(int g, std::uint64_t epoch) {
    if (binst_.at(static_cast<std::size_t>(g)).epoch != epoch) return;
    bprime_send(g, 1);
    env_.after_ticks(id_, p_.delta_B.ceil_int(), b_group(g), [this, g, epoch] { bprime_step(g, 1, epoch); });
}

void Node::bprime_step(int g, int k, std::uint64_t epoch) {
    BInstance& b = binst_.at(static_cast<std::size_t>(g));
    if (b.epoch != epoch || !b.live) return;
    std::vector<int> bits(static_cast<std::size_t>(p_.n), -1);
    if (auto it = b.inbox.find(k); it != b.inbox.end()) bits = it->second;
    b.inbox.erase(k);
    b.king->receive(k, bits);
    b.processed = k;
    if (k < p_.K_B) {
        bprime_send(g, k + 1);
        env_.after_ticks(id_, p_.delta_B.ceil_int(), b_group(g),
                         [this, g, k, epoch] { bprime_step(g, k + 1, epoch); });
        return;
    }
    int out = b.king->value();
    b.live = false;
    env_.record(id_, Kind::G4, g, out);
    if (out == 1) {
        relax_left_ = relax_len_;
        env_.record(id_, Kind::G5, g);
        appearance(g);
    }
}

void Node::on_ba(const Message& m) {
    const Payload& pl = m.payload;
    BInstance& b = binst_.at(static_cast<std::size_t>(pl.general));
    if (!b.live) return;
    if (pl.round <= b.processed) {
        env_.diag(id_, "B' " + std::to_string(pl.general) + ": late round " + std::to_string(pl.round) +
                           " from " + std::to_string(m.sender) + " dropped");
        return;
    }
    auto& slot = b.inbox[pl.round];
    if (slot.empty()) slot.assign(static_cast<std::size_t>(p_.n), -1);
    slot[static_cast<std::size_t>(m.sender)] = pl.bit;  // latest wins
}

}  // namespace pss
