#include <gtest/gtest.h>

#include <random>

#include "king_search.hpp"
#include "node_harness.hpp"

using namespace pss;
using harness::World;

namespace {

const ParamSet& params() {
    static ParamSet p = harness::example_params();
    return p;
}

void quiet(World& w, std::int64_t v_left = 1 << 20) {
    for (auto& n : w.nodes) {
        NodeInit s;
        s.tau = 0;
        s.tau_sch = 20000;
        s.v_left = v_left;
        n->init(s);
    }
}

void make_happy(World& w, int i) {
    w.auto_deliver = false;
    for (int q = 1; q < 4; ++q) w.node(i).on_message(Message{q, i, Fixed{}, Payload::make_mark(GOOD | BEST)});
    w.auto_deliver = true;
    ASSERT_TRUE(w.node(i).is_happy());
}

}  // namespace

TEST(Help, TimerGatesInitiator) {
    World w(params(), 1);
    w.auto_deliver = false;
    quiet(w, 0);
    w.node(0).help();
    EXPECT_EQ(w.count(Kind::G0), 1);
    ASSERT_EQ(w.sent.size(), 1u);
    EXPECT_EQ(w.sent[0].second, Payload::initiator(0));
    EXPECT_FALSE(w.node(0).v_closed());
    w.node(0).help();
    EXPECT_EQ(w.count(Kind::G0), 1);
    // each tick calls help again while unhappy
    const auto dv = params().Delta_v.ceil_int();
    for (int k = 0; k + 1 < dv; ++k) w.tick(0);
    EXPECT_EQ(w.count(Kind::G0), 1);
    w.tick(0);
    EXPECT_EQ(w.count(Kind::G0), 2);
    auto g0 = w.of(Kind::G0);
    EXPECT_EQ(g0[1].time - g0[0].time, Fixed::from_int(dv));
}

TEST(Initiator, UnhappyAndRelaxedInvokes) {
    World w(params(), 1);
    w.auto_deliver = false;
    quiet(w);
    w.node(0).on_message(Message{2, 0, Fixed{}, Payload::initiator(2)});
    EXPECT_EQ(w.count(Kind::G1), 1);
    EXPECT_EQ(w.of(Kind::G1)[0].a, 2);
    ASSERT_FALSE(w.sent.empty());
    EXPECT_EQ(w.sent.back().second, Payload::support(2));
}

TEST(Initiator, HappyIgnores) {
    World w(params(), 1);
    quiet(w);
    make_happy(w, 0);
    w.auto_deliver = false;
    w.node(0).on_message(Message{2, 0, Fixed{}, Payload::initiator(2)});
    EXPECT_EQ(w.count(Kind::G1), 0);
}

TEST(Initiator, RelaxOpenIgnores) {
    World w(params(), 1);
    w.auto_deliver = false;
    NodeInit s;
    s.tau_sch = 20000;
    s.v_left = 1 << 20;
    s.relax_left = 50;
    w.node(0).init(s);
    w.node(0).on_message(Message{2, 0, Fixed{}, Payload::initiator(2)});
    EXPECT_EQ(w.count(Kind::G1), 0);
    for (int k = 0; k < 50; ++k) w.tick(0);
    w.node(0).on_message(Message{2, 0, Fixed{}, Payload::initiator(2)});
    EXPECT_EQ(w.count(Kind::G1), 1);
}

TEST(IAccepted, Branches) {
    const auto& p = params();
    ASSERT_EQ(p.theta_d(), Fixed::from_int(1));
    struct Case {
        std::int64_t tau0;
        std::int64_t relax;
        int g3;
        int bit;
    };
    for (Case c : {Case{3, 0, 1, 1}, Case{4, 0, 1, 1}, Case{5, 0, 1, 0}, Case{6, 0, 1, 0}, Case{7, 0, 0, -1},
                   Case{3, 10, 1, 0}}) {
        World w(p, 1);
        w.auto_deliver = false;
        NodeInit s;
        s.tau_sch = 20000;
        s.v_left = 1 << 20;
        s.relax_left = c.relax;
        w.node(0).init(s);
        w.node(0).on_i_accepted(1, c.tau0);
        ASSERT_EQ(w.count(Kind::G3), c.g3) << c.tau0;
        if (c.g3) EXPECT_EQ(w.of(Kind::G3)[0].b, c.bit) << c.tau0;
        EXPECT_TRUE(w.node(0).bprime_live(1)) << c.tau0;
    }
}

TEST(IAccepted, SilentInstanceStillRelays) {
    World w(params(), 1);
    w.auto_deliver = false;
    quiet(w);
    w.node(0).on_i_accepted(1, 9);
    for (int k = 0; k < params().delta_B.ceil_int(); ++k) w.tick(0);
    bool relayed = false;
    for (const auto& [s, pl] : w.sent) relayed = relayed || (pl.type == MsgType::BA && pl.round == 1 && pl.bit == 0);
    EXPECT_TRUE(relayed);
}

namespace {

struct BRun {
    std::vector<int> h_nodes;
    std::vector<std::int64_t> h_times;
    int g4 = 0;
};

// Honest nodes 0..live-1 start B' for General g in the same step; node 3
// (when live == 3) is faulty and may inject arbitrary round messages.
BRun bprime(const std::vector<std::int64_t>& tau0, std::mt19937_64* byz, int g = 2) {
    const auto& p = params();
    int live = static_cast<int>(tau0.size());
    World w(p, live);
    quiet(w);
    for (int i = 0; i < live; ++i) w.node(i).on_i_accepted(g, tau0[static_cast<std::size_t>(i)]);
    const int total = p.Delta_B.ceil_int() + 3;
    for (int k = 0; k < total; ++k) {
        if (byz)
            for (int r = 1; r <= p.K_B; ++r)
                for (int to = 0; to < live; ++to)
                    if ((*byz)() % 3 == 0) w.inject(3, to, Payload::ba(g, r, static_cast<int>((*byz)() % 2)));
        w.step();
    }
    BRun out;
    for (const auto& r : w.recs) {
        if (r.kind == Kind::H) {
            out.h_nodes.push_back(r.node);
            out.h_times.push_back(r.time.floor_int());
        }
        if (r.kind == Kind::G4) ++out.g4;
    }
    return out;
}

}  // namespace

TEST(BPrime, AllOnesGiveSimultaneousH) {
    auto r = bprime({3, 3, 3, 3}, nullptr);
    ASSERT_EQ(r.h_nodes.size(), 4u);
    for (auto t : r.h_times) EXPECT_EQ(t, params().Delta_B.ceil_int());
    EXPECT_EQ(r.g4, 4);
}

TEST(BPrime, AllZerosGiveNoH) {
    auto r = bprime({5, 5, 5, 5}, nullptr);
    EXPECT_TRUE(r.h_nodes.empty());
    EXPECT_EQ(r.g4, 4);
}

TEST(BPrime, SilentFaultyNode) {
    auto r = bprime({3, 3, 3}, nullptr);
    EXPECT_EQ(r.h_nodes.size(), 3u);
    auto z = bprime({6, 6, 9}, nullptr);
    EXPECT_TRUE(z.h_nodes.empty());
}

TEST(BPrime, AgreementUnderRandomFaultyVotes) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 150; ++trial) {
        std::vector<std::int64_t> t0;
        for (int i = 0; i < 3; ++i) t0.push_back(rng() % 2 ? 3 : 5);
        auto r = bprime(t0, &rng);
        EXPECT_TRUE(r.h_nodes.empty() || r.h_nodes.size() == 3u) << trial;
        if (!r.h_times.empty())
            for (auto t : r.h_times) EXPECT_EQ(t, r.h_times[0]);
        bool all1 = t0[0] == 3 && t0[1] == 3 && t0[2] == 3;
        bool all0 = t0[0] == 5 && t0[1] == 5 && t0[2] == 5;
        if (all1) EXPECT_EQ(r.h_nodes.size(), 3u);
        if (all0) EXPECT_TRUE(r.h_nodes.empty());
    }
}

TEST(BPrime, LateRoundDroppedWithDiagnostic) {
    const auto& p = params();
    World w(p, 1);
    w.auto_deliver = false;
    quiet(w);
    w.node(0).on_i_accepted(1, 3);
    for (int k = 0; k < 2 * p.delta_B.ceil_int(); ++k) w.tick(0);
    w.node(0).on_message(Message{2, 0, Fixed{}, Payload::ba(1, 1, 1)});
    bool noted = false;
    for (const auto& d : w.diags) noted = noted || d.find("late round 1") != std::string::npos;
    EXPECT_TRUE(noted);
}

TEST(BPrime, SelfPreemption) {
    const auto& p = params();
    World w(p, 1);
    w.auto_deliver = false;
    quiet(w);
    w.node(0).on_i_accepted(1, 3);
    for (int k = 0; k < 10; ++k) w.tick(0);
    w.node(0).on_i_accepted(1, 5);
    for (int k = 0; k < p.Delta_B.ceil_int() + 20; ++k) w.tick(0);
    EXPECT_EQ(w.count(Kind::G3), 2);
    EXPECT_EQ(w.count(Kind::G4), 1);
}

TEST(BPrime, NoLiveInstanceIgnoresRounds) {
    World w(params(), 1);
    w.auto_deliver = false;
    quiet(w);
    w.node(0).on_message(Message{2, 0, Fixed{}, Payload::ba(1, 1, 1)});
    EXPECT_TRUE(w.diags.empty());
    EXPECT_FALSE(w.node(0).bprime_live(1));
}

TEST(Appearance, RelaxBlocksInitiatorsAfterH) {
    const auto& p = params();
    World w(p, 1);
    w.auto_deliver = false;
    quiet(w);
    w.node(0).on_i_accepted(1, 3);
    // feed our own votes back so the lone node decides 1
    for (int k = 0; k < p.Delta_B.ceil_int() + 2; ++k) {
        w.tick(0);
        for (const auto& [s, pl] : w.sent)
            if (pl.type == MsgType::BA)
                for (int q = 0; q < 4; ++q) w.node(0).on_message(Message{q, 0, Fixed{}, pl});
        w.sent.clear();
    }
    ASSERT_EQ(w.count(Kind::G5), 1);
    EXPECT_FALSE(w.node(0).relax_closed());
    w.node(0).on_message(Message{2, 0, Fixed{}, Payload::initiator(2)});
    EXPECT_EQ(w.count(Kind::G1), 0);
}

TEST(IAcceptUnit, ConfirmThenAccept) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), false);
    IAccept ia(c);
    EXPECT_FALSE(ia.on_support(1, 0, 100).confirm);
    auto a = ia.on_support(1, 2, 101);
    EXPECT_TRUE(a.confirm);
    EXPECT_FALSE(ia.on_support(1, 3, 101).confirm);  // once per refractory period
    EXPECT_FALSE(ia.on_confirm(1, 0, 101).accept);
    EXPECT_FALSE(ia.on_confirm(1, 1, 102).accept);
    auto b = ia.on_confirm(1, 2, 102);
    EXPECT_TRUE(b.accept);
    // second most recent distinct Support arrived at 101
    EXPECT_EQ(b.est, Fixed::from_int(101) - params().theta_d());
    EXPECT_FALSE(ia.on_confirm(1, 3, 103).accept);
}

TEST(IAcceptUnit, ConfirmRelayAndStaleEstimate) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), false);
    IAccept ia(c);
    EXPECT_FALSE(ia.on_confirm(0, 1, 500).confirm);
    EXPECT_TRUE(ia.on_confirm(0, 2, 500).confirm);  // f+1 Confirms relay
    auto a = ia.on_confirm(0, 3, 501);
    ASSERT_TRUE(a.accept);
    EXPECT_EQ(a.est, Fixed::from_int(501 - c.stale));
}

TEST(IAcceptUnit, WindowsExpire) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), false);
    IAccept ia(c);
    ia.on_support(3, 0, 10);
    EXPECT_FALSE(ia.on_support(3, 1, 10 + c.support_window).confirm);
    EXPECT_TRUE(ia.on_support(3, 2, 10 + c.support_window).confirm);
}

TEST(IAcceptUnit, GateRejectsOldEstimates) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), true);
    ASSERT_TRUE(c.gate.has_value());
    IAccept ia(c);
    ia.on_confirm(0, 1, 500);
    ia.on_confirm(0, 2, 500);
    EXPECT_FALSE(ia.on_confirm(0, 3, 501).accept);
}

TEST(IAcceptUnit, GateAcceptsFreshEstimate) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), true);
    IAccept ia(c);
    ia.on_support(0, 1, 500);
    ia.on_support(0, 2, 501);
    ia.on_confirm(0, 1, 501);
    ia.on_confirm(0, 2, 502);
    auto a = ia.on_confirm(0, 3, 503);
    ASSERT_TRUE(a.accept);
    EXPECT_EQ(a.est, Fixed::from_int(500) - params().theta_d());
}

TEST(IAcceptUnit, GateWaitsForLateSupports) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), true);
    IAccept ia(c);
    ia.on_confirm(0, 1, 500);
    ia.on_confirm(0, 2, 500);
    EXPECT_FALSE(ia.on_confirm(0, 3, 500).accept);
    EXPECT_FALSE(ia.on_support(0, 1, 501).accept);
    EXPECT_TRUE(ia.on_support(0, 2, 501).accept);
}

TEST(IAcceptUnit, ConfirmsBeforeTheEstimateDoNotCount) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), true);
    IAccept ia(c);
    ia.on_confirm(0, 1, 500);
    ia.on_confirm(0, 2, 500);
    ia.on_confirm(0, 3, 503);
    ia.on_support(0, 1, 503);
    // estimate 503 - theta d: the Confirms at 500 are too early for it
    EXPECT_FALSE(ia.on_support(0, 2, 503).accept);
}

TEST(IAcceptUnit, MissedRoundCapsLaterEstimates) {
    IAcceptConfig c = IAcceptConfig::from_params(params(), true);
    IAccept ia(c);
    ia.on_support(0, 1, 495);
    ia.on_support(0, 2, 496);
    ia.on_confirm(0, 1, 499);
    ia.on_confirm(0, 2, 500);
    EXPECT_FALSE(ia.on_confirm(0, 3, 501).accept);  // estimate 494 is too old
    ia.on_support(0, 3, 502);
    ia.on_support(0, 1, 502);
    ia.on_confirm(0, 1, 502);
    ia.on_confirm(0, 2, 502);
    // fresh estimate 501 - theta d, but past the cap left by the missed round
    EXPECT_FALSE(ia.on_confirm(0, 3, 502).accept);
}

TEST(PhaseKing, ExhaustiveThreeRoundPhases) {
    auto r = kingsearch::search<PhaseKing>(4, 1);
    EXPECT_EQ(r.counterexamples, 0) << r.first;
    EXPECT_GT(r.tuples, 0);
    EXPECT_EQ(PhaseKing::rounds_for(1), params().K_B);
}

TEST(PhaseKing, TwoRoundPhasesBreakAtFourNodes) {
    auto r = kingsearch::search<PhaseKing2>(4, 1);
    EXPECT_GT(r.counterexamples, 0);
    // n > 4f is enough for the two-round variant
    EXPECT_EQ(kingsearch::search<PhaseKing2>(5, 1).counterexamples, 0);
}

TEST(PhaseKing, SilentFaultyAllOnes) {
    for (int v : {0, 1}) {
        std::vector<PhaseKing> ks;
        for (int i = 0; i < 3; ++i) ks.emplace_back(4, 1, i, v);
        for (int r = 1; r <= ks[0].rounds(); ++r) {
            std::vector<int> bits(4, -1);
            for (int i = 0; i < 3; ++i)
                if (auto o = ks[static_cast<std::size_t>(i)].outgoing(r)) bits[static_cast<std::size_t>(i)] = *o;
            for (auto& k : ks) k.receive(r, bits);
        }
        for (auto& k : ks) {
            EXPECT_EQ(k.value(), v);
            EXPECT_TRUE(k.done());
        }
    }
}
