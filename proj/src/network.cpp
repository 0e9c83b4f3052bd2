#include "pss/network.hpp"

#include <stdexcept>

namespace pss {

std::string mark_name(MarkValue v) {
    switch (v & 3) {
        case 0: return "{}";
        case GOOD: return "{GOOD}";
        case BEST: return "{BEST}";
        default: return "{GOOD,BEST}";
    }
}

bool valid_payload(const Payload& p, int n, int K_B) {
    switch (p.type) {
        case MsgType::Mark: return p.mark <= 3 && p.general == -1 && p.round == 0 && p.bit == 0;
        case MsgType::Initiator:
        case MsgType::Support:
        case MsgType::Confirm: return p.general >= 0 && p.general < n && p.mark == 0 && p.round == 0 && p.bit == 0;
        case MsgType::BA:
            return p.general >= 0 && p.general < n && p.round >= 1 && p.round <= K_B && (p.bit == 0 || p.bit == 1) &&
                   p.mark == 0;
    }
    return false;
}

Network::Network(Engine& engine, int n, int K_B, Fixed d, DelayOracle delay, DeliverFn deliver)
    : engine_(engine), n_(n), K_B_(K_B), d_(d), delay_(std::move(delay)), deliver_(std::move(deliver)) {}

void Network::deliver_after(const Message& m, Fixed delay) {
    if (delay < Fixed{} || delay >= d_) {
        throw std::logic_error("delay " + delay.str() + " outside [0, d)");
    }
    engine_.schedule(m.sent + delay, m.receiver, Rank::Deliver, [this, m] {
        ++delivered_;
        deliver_(m);
    });
}

void Network::distribute(int sender, const Payload& value) {
    if (!valid_payload(value, n_, K_B_)) throw std::invalid_argument("nonfaulty node sent an invalid payload");
    Message m{sender, 0, engine_.now(), value};
    if (send_hook_) send_hook_(m, false);
    for (int r = 0; r < n_; ++r) {
        m.receiver = r;
        deliver_after(m, delay_(m));
    }
}

bool Network::byzantine_emit(int sender, int receiver, const Payload& value, Fixed delay, std::int64_t sender_tick) {
    if (!valid_payload(value, n_, K_B_)) throw std::invalid_argument("payload outside the alphabet");
    if (receiver < 0 || receiver >= n_) throw std::invalid_argument("unknown receiver");
    auto key = std::make_tuple(sender, static_cast<int>(value.type), receiver);
    auto it = last_emit_tick_.find(key);
    if (it != last_emit_tick_.end() && it->second == sender_tick) {
        ++capped_;
        return false;
    }
    last_emit_tick_[key] = sender_tick;
    Message m{sender, receiver, engine_.now(), value};
    if (send_hook_) send_hook_(m, true);
    deliver_after(m, delay);
    return true;
}

}  // namespace pss
