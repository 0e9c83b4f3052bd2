#include "pss/node.hpp"

#include <algorithm>
#include <map>

namespace pss {

std::optional<LocalTime> ft_average(const std::vector<TickMark>& psi, int n, int f, LocalTime now, std::int64_t span,
                                    std::int64_t tau_max) {
    LocalTime tau0 = wrap(now - span, tau_max);
    std::map<int, std::pair<int, std::int64_t>> per_source;
    for (const auto& m : psi) {
        auto& e = per_source[m.source];
        ++e.first;
        e.second = ominus(m.tick, tau0, tau_max);
    }
    std::vector<std::int64_t> S;
    for (const auto& [src, e] : per_source)
        if (e.first == 1) S.push_back(e.second);
    if (static_cast<int>(S.size()) <= f) return std::nullopt;
    std::sort(S.begin(), S.end());
    std::size_t hi = static_cast<std::size_t>(std::min<int>(static_cast<int>(S.size()), n - f) - 1);
    std::int64_t mid = (S[static_cast<std::size_t>(f)] + S[hi]) / 2;  // both non-negative: floor
    return oplus(tau0, mid, tau_max);
}

std::vector<TickMark> window_view(const Trail& t, Selector sel, Fixed window, LocalTime now) {
    std::vector<TickMark> out;
    for (const auto& m : t.marks())
        if (selects(sel, m.value) && Fixed::from_int(t.age(m, now)) <= window)
            out.push_back(TickMark{m.tick, m.source, m.seq});
    return out;
}

Node::Node(const ParamSet& p, int id, NodeEnv& env, Engine::Group group_base, const NodeOptions& opt)
    : p_(p),
      id_(id),
      env_(env),
      group_base_(group_base),
      trail_(p.tau_max, observation_window_ticks(p)),
      v_len_(p.Delta_v.ceil_int()),
      relax_len_(p.Delta_relax.ceil_int()),
      blank_len_(p.delta3.ceil_int()),
      ia_(IAcceptConfig::from_params(p, opt.gate)),
      binst_(static_cast<std::size_t>(p.n)) {}

void Node::init(const NodeInit& s) {
    tau_ = s.tau;
    tau_sch_ = s.tau_sch;
    k_A_ = s.k_A;
    v_left_ = s.v_left;
    relax_left_ = s.relax_left;
    trail_.start_blanking(s.blank_left);
    last_pulse_ = s.prev_pulse;
    clamp();
    trail_.load(s.trail, tau_);
    trail_.prune(tau_);
}

void Node::clamp() {
    tau_ = wrap(tau_, p_.tau_max);
    tau_sch_ = wrap(tau_sch_, p_.tau_max);
    k_A_ = ((k_A_ % p_.K_A) + p_.K_A) % p_.K_A;
    v_left_ = std::clamp<std::int64_t>(v_left_, 0, v_len_);
    relax_left_ = std::clamp<std::int64_t>(relax_left_, 0, relax_len_);
    if (trail_.blank_left() > blank_len_ || trail_.blank_left() < 0) trail_.start_blanking(blank_len_);
    if (last_pulse_) last_pulse_ = wrap(*last_pulse_, p_.tau_max);
}

void Node::on_tick() {
    clamp();
    tau_ = oplus(tau_, 1, p_.tau_max);
    ++ticks_;
    if (v_left_ > 0) --v_left_;
    if (relax_left_ > 0) --relax_left_;
    trail_.tick_blanking();
    trail_.prune(tau_);
    observe();
    env_.record(id_, Kind::C, tau_, flags());
    if (tau_ == tau_sch_) pulse();
}

void Node::observe() {
    TrailFlags fl = classify(trail_, p_, id_, tau_, std::nullopt, last_l1_seq_);
    is_best_ = fl.shortcut;
    is_happy_ = fl.happy;
    if (fl.engaging) {
        env_.record(id_, Kind::L1, tau_);
        last_l1_seq_ = trail_.last_seq();
        start_engage();
    }
    ClusterQuery l2;
    l2.sel = Selector::b2;
    l2.min_sources = p_.n - p_.f;
    l2.span = p_.eps0_bar;
    l2.window = p_.eps0_bar;
    l2.newer_than = last_l2_seq_;
    if (find_cluster(trail_, tau_, l2)) {
        env_.record(id_, Kind::L2, tau_);
        last_l2_seq_ = trail_.last_seq();
    }
    if (!is_happy_) help();
}

void Node::pulse() {
    bool good = last_pulse_ && good_gap(p_, tau_, *last_pulse_);
    MarkValue v = 0;
    if (good) v |= GOOD;
    if (is_best_ && k_A_ == 0) v |= BEST;
    env_.record(id_, Kind::P, k_A_, tau_, v);
    env_.record(id_, Kind::S, static_cast<std::int64_t>(MsgType::Mark), v);
    last_pulse_ = tau_;
    env_.distribute(id_, Payload::make_mark(v));
    if (k_A_ > 0 && !engage_live_) {
        LocalTime at = tau_;
        env_.after_ticks(id_, p_.delta0.ceil_int(), absorb_group(), [this, at] { absorb_fire(at); });
    }
}

void Node::absorb_fire(LocalTime pulse_tick) {
    clamp();
    if (k_A_ == 0) return;
    auto psi = window_view(trail_, Selector::b0, absorb_window(p_), tau_);
    std::int64_t span = std::max(p_.delta_eps.ceil_int(), absorb_window(p_).ceil_int());
    auto avg = ft_average(psi, p_.n, p_.f, tau_, span, p_.tau_max);
    int own_count = 0;
    LocalTime own = pulse_tick;
    for (const auto& m : psi)
        if (m.source == id_) {
            ++own_count;
            own = m.tick;
        }
    if (own_count != 1) {
        env_.diag(id_, "absorb: " + std::to_string(own_count) + " own marks in window, using pulse tick");
        own = pulse_tick;
    }
    std::int64_t shift = 0;
    if (avg) {
        shift = ominus(*avg, own, p_.tau_max);
    } else {
        env_.diag(id_, "absorb: too few sources for averaging");
    }
    tau_sch_ = oplus(oplus(tau_sch_, shift, p_.tau_max), p_.T, p_.tau_max);
    env_.record(id_, Kind::D0, tau_sch_);
    k_A_ = (k_A_ + 1) % p_.K_A;
    env_.record(id_, Kind::K, k_A_);
}

void Node::start_engage() {
    env_.cancel_group(absorb_group());
    env_.cancel_group(engage_group());
    engage_live_ = true;
    env_.after_ticks(id_, p_.delta1.ceil_int(), engage_group(), [this] { engage_adjust(); });
}

void Node::engage_adjust() {
    clamp();
    auto psi = window_view(trail_, Selector::b2, engage_window(p_), tau_);
    std::int64_t span = std::max(p_.delta_eps.ceil_int(), engage_window(p_).ceil_int());
    auto avg = ft_average(psi, p_.n, p_.f, tau_, span, p_.tau_max);
    if (!avg) {
        env_.diag(id_, "engage: too few sources, aborted");
        engage_live_ = false;
        return;
    }
    tau_sch_ = oplus(*avg, p_.T, p_.tau_max);
    env_.record(id_, Kind::D1, tau_sch_);
    env_.after_ticks(id_, p_.delta2.ceil_int(), engage_group(), [this] {
        k_A_ = 1;
        env_.record(id_, Kind::K, k_A_);
        engage_live_ = false;
    });
}

void Node::on_message(const Message& m) {
    clamp();
    const Payload& pl = m.payload;
    switch (pl.type) {
        case MsgType::Mark:
            trail_.record(pl.mark, tau_, m.sender);
            observe();
            env_.record(id_, Kind::R, m.sender, pl.mark, tau_, flags());
            break;
        case MsgType::Initiator: on_initiator(pl.general); break;
        case MsgType::Support: handle_ia(pl.general, ia_.on_support(pl.general, m.sender, ticks_)); break;
        case MsgType::Confirm: handle_ia(pl.general, ia_.on_confirm(pl.general, m.sender, ticks_)); break;
        case MsgType::BA: on_ba(m); break;
    }
}

void Node::appearance(int g) {
    env_.record(id_, Kind::H, g);
    tau_sch_ = oplus(tau_, p_.T, p_.tau_max);
    k_A_ = 1;
    env_.record(id_, Kind::D2, tau_sch_);
    env_.cancel_group(absorb_group());
    env_.cancel_group(engage_group());
    engage_live_ = false;
    trail_.clear();
    trail_.start_blanking(blank_len_);
    last_pulse_.reset();
}

}  // namespace pss
