#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "node_harness.hpp"

using namespace pss;
using harness::World;

namespace {

const ParamSet& params() {
    static ParamSet p = harness::example_params();
    return p;
}

std::vector<TickMark> marks_at(LocalTime base, std::vector<std::int64_t> offs) {
    std::vector<TickMark> v;
    int src = 0;
    for (auto o : offs) v.push_back(TickMark{base + o, src++, 0});
    return v;
}

Message mark_from(int src, MarkValue v, int to = 0) { return Message{src, to, Fixed{}, Payload::make_mark(v)}; }

// node 0 alone, quiet emergency path, pulse due on the next tick
World& lone(World& w, LocalTime X, int kA, bool prev = true) {
    w.auto_deliver = false;
    NodeInit s;
    s.tau = X - 1;
    s.tau_sch = X;
    s.k_A = kA;
    s.v_left = 100000;
    if (prev) s.prev_pulse = X - params().T;
    w.node(0).init(s);
    return w;
}

}  // namespace

TEST_CASE("ft_average examples") {
    const std::int64_t tm = 1 << 12;
    // now=100, span=50: tau0 = 50
    auto a = ft_average(marks_at(50, {0, 10, 20, 30}), 4, 1, 100, 50, tm);
    REQUIRE(a);
    CHECK(*a == 65);
    auto b = ft_average(marks_at(50, {5, 9}), 4, 1, 100, 50, tm);
    REQUIRE(b);
    CHECK(*b == 59);
    auto c = ft_average(marks_at(50, {0, 1, 2}), 4, 1, 100, 50, tm);
    REQUIRE(c);
    CHECK(*c == 51);  // 1.5 rounds down
    auto d = ft_average(marks_at(50, {7, 7, 7, 7}), 4, 1, 100, 50, tm);
    CHECK(*d == 57);
    CHECK_FALSE(ft_average(marks_at(50, {3}), 4, 1, 100, 50, tm));
    CHECK_FALSE(ft_average({}, 4, 1, 100, 50, tm));
}

TEST_CASE("ft_average drops sources with two marks and wraps") {
    const std::int64_t tm = 128;
    std::vector<TickMark> v{{120, 0, 0}, {125, 1, 0}, {2, 2, 0}, {3, 3, 0}, {4, 3, 0}};
    // now = 10, span 20: tau0 = 118; offsets 2, 7, 12 (node 3 ignored)
    auto r = ft_average(v, 4, 1, 10, 20, tm);
    REQUIRE(r);
    CHECK(*r == wrap(118 + (7 + 12) / 2, tm));
}

TEST_CASE("pulse mark follows goodness, shortcut and k_A") {
    const auto& p = params();
    const LocalTime X = 2000;
    auto with_shortcut = [&](World& w) {
        for (int q = 0; q < 4; ++q) w.node(0).on_message(mark_from(q, GOOD));
    };
    {
        World w(p, 1);
        NodeInit s;
        s.tau = X - 1 - p.T;
        s.tau_sch = X;
        s.k_A = 0;
        s.v_left = 100000;
        s.prev_pulse = X - p.T;
        w.auto_deliver = false;
        w.node(0).init(s);
        with_shortcut(w);
        for (int i = 0; i <= p.T; ++i) w.tick(0);
        auto P = w.of(Kind::P);
        REQUIRE(P.size() == 1);
        CHECK(P[0].c == (GOOD | BEST));
        CHECK(P[0].a == 0);
    }
    {
        World w(p, 1);
        NodeInit s;
        s.tau = X - 1 - p.T;
        s.tau_sch = X;
        s.k_A = 2;
        s.v_left = 100000;
        s.prev_pulse = X - p.T;
        w.auto_deliver = false;
        w.node(0).init(s);
        with_shortcut(w);
        for (int i = 0; i <= p.T; ++i) w.tick(0);
        auto P = w.of(Kind::P);
        REQUIRE(P.size() == 1);
        CHECK(P[0].c == GOOD);
    }
    {
        World w(p, 1);
        lone(w, X, 0, false);
        w.tick(0);
        auto P = w.of(Kind::P);
        REQUIRE(P.size() == 1);
        CHECK(P[0].c == 0);
        REQUIRE(w.sent.size() == 1);
        CHECK(w.sent[0].second == Payload::make_mark(0));
    }
}

TEST_CASE("absorb adjusts by the fault-tolerant midpoint") {
    const auto& p = params();
    const LocalTime X = 3000;
    World w(p, 1);
    lone(w, X, 1);
    w.tick(0);  // pulse at X
    REQUIRE(w.count(Kind::P) == 1);
    w.node(0).on_message(mark_from(0, GOOD));
    for (int k = 1; k <= 32; ++k) {
        w.tick(0);
        if (k == 10) w.node(0).on_message(mark_from(1, GOOD));
        if (k == 20) w.node(0).on_message(mark_from(2, GOOD));
        if (k == 30) w.node(0).on_message(mark_from(3, GOOD));
    }
    REQUIRE(p.delta0.ceil_int() == 32);
    auto D = w.of(Kind::D0);
    REQUIRE(D.size() == 1);
    CHECK(D[0].a == X + 15 + p.T);
    auto K = w.of(Kind::K);
    REQUIRE(K.size() == 1);
    CHECK(K[0].a == 2);
    CHECK(w.node(0).k_A() == 2);
}

TEST_CASE("absorb with everyone on the same tick only adds T") {
    const auto& p = params();
    const LocalTime X = 3000;
    World w(p, 1);
    lone(w, X, 3);
    w.tick(0);
    for (int q = 0; q < 4; ++q) w.node(0).on_message(mark_from(q, GOOD));
    for (int k = 0; k < 32; ++k) w.tick(0);
    auto D = w.of(Kind::D0);
    REQUIRE(D.size() == 1);
    CHECK(D[0].a == X + p.T);
    CHECK(w.node(0).k_A() == 4);
    CHECK(w.diags.empty());
}

TEST_CASE("absorb without its own mark falls back to the pulse tick") {
    const auto& p = params();
    const LocalTime X = 3000;
    World w(p, 1);
    lone(w, X, 1);
    w.tick(0);
    for (int q = 1; q < 4; ++q) w.node(0).on_message(mark_from(q, GOOD));
    for (int k = 0; k < 32; ++k) w.tick(0);
    REQUIRE(w.count(Kind::D0) == 1);
    CHECK(w.of(Kind::D0)[0].a == X + p.T);
    bool noted = false;
    for (const auto& d : w.diags) noted = noted || d.find("own marks") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("k_A = 0 pulse schedules no absorb") {
    const auto& p = params();
    World w(p, 1);
    lone(w, 500, 0);
    w.tick(0);
    CHECK_FALSE(w.has_pending(w.absorb_group(0)));
}

TEST_CASE("engage preempts absorb and sets k_A to 1") {
    const auto& p = params();
    const LocalTime X = 3000;
    World w(p, 1);
    lone(w, X, 3);
    w.tick(0);
    REQUIRE(w.has_pending(w.absorb_group(0)));
    w.node(0).on_message(mark_from(1, GOOD | BEST));
    w.node(0).on_message(mark_from(2, GOOD | BEST));
    CHECK(w.count(Kind::L1) == 1);
    CHECK_FALSE(w.has_pending(w.absorb_group(0)));
    CHECK(w.node(0).engage_live());
    for (int k = 0; k < 40; ++k) w.tick(0);
    CHECK(w.count(Kind::D0) == 0);
    REQUIRE(w.count(Kind::D1) == 1);
    auto K = w.of(Kind::K);
    REQUIRE(K.size() == 1);
    CHECK(K[0].a == 1);
    CHECK(K[0].time - w.of(Kind::D1)[0].time == Fixed::from_int(p.delta2.ceil_int()));
    CHECK_FALSE(w.node(0).engage_live());
}

TEST_CASE("engage target is the midpoint of the best marks plus T") {
    const auto& p = params();
    World w(p, 1);
    w.auto_deliver = false;
    const LocalTime M = 5000;
    NodeInit s;
    s.tau = M - 1;
    s.tau_sch = 9000;
    s.v_left = 100000;
    w.node(0).init(s);
    w.tick(0);  // tau = M
    w.node(0).on_message(mark_from(1, GOOD | BEST));
    w.tick(0);  // M+1
    w.node(0).on_message(mark_from(2, GOOD | BEST));
    REQUIRE(w.count(Kind::L1) == 1);
    w.tick(0);  // M+2
    w.node(0).on_message(mark_from(3, GOOD | BEST));
    CHECK(w.count(Kind::L1) == 2);  // fresh evidence restarts the chain
    for (int k = 0; k < 10; ++k) w.tick(0);
    auto D = w.of(Kind::D1);
    REQUIRE(D.size() == 1);
    CHECK(D[0].a == M + 1 + p.T);
}

TEST_CASE("a second L1 inside the wait leaves a single D1") {
    const auto& p = params();
    World w(p, 1);
    NodeInit s;
    s.tau = 700;
    s.tau_sch = 9000;
    s.v_left = 100000;
    w.auto_deliver = false;
    w.node(0).init(s);
    w.node(0).on_message(mark_from(1, GOOD | BEST));
    w.node(0).on_message(mark_from(2, GOOD | BEST));
    w.tick(0);
    w.tick(0);
    w.node(0).on_message(mark_from(3, GOOD | BEST));
    CHECK(w.count(Kind::L1) == 2);
    for (int k = 0; k < 20; ++k) w.tick(0);
    CHECK(w.count(Kind::D1) == 1);
    CHECK(w.count(Kind::K) == 1);
}

TEST_CASE("engage with too few best sources aborts") {
    const auto& p = params();
    World w(p, 1);
    NodeInit s;
    s.tau = 700;
    s.tau_sch = 9000;
    s.v_left = 100000;
    w.auto_deliver = false;
    w.node(0).init(s);
    // source 2 twice: engaging sees two sources, the average only one
    w.node(0).on_message(mark_from(1, GOOD | BEST));
    w.node(0).on_message(mark_from(2, GOOD | BEST));
    w.node(0).on_message(mark_from(2, GOOD | BEST));
    for (int k = 0; k < 20; ++k) w.tick(0);
    CHECK(w.count(Kind::D1) == 0);
    CHECK_FALSE(w.node(0).engage_live());
}

TEST_CASE("appearance during the delta2 wait wins") {
    const auto& p = params();
    World w(p, 1);
    NodeInit s;
    s.tau = 700;
    s.tau_sch = 9000;
    s.v_left = 100000;
    w.auto_deliver = false;
    w.node(0).init(s);
    w.node(0).on_message(mark_from(1, GOOD | BEST));
    w.node(0).on_message(mark_from(2, GOOD | BEST));
    for (int k = 0; k < p.delta1.ceil_int(); ++k) w.tick(0);
    REQUIRE(w.count(Kind::D1) == 1);
    w.node(0).appearance(2);
    for (int k = 0; k < 10; ++k) w.tick(0);
    CHECK(w.count(Kind::K) == 0);
    CHECK(w.node(0).k_A() == 1);
}

TEST_CASE("appearance resets schedule, clears and blanks the trail") {
    const auto& p = params();
    World w(p, 1);
    lone(w, 3000, 4);
    w.tick(0);
    w.node(0).on_message(mark_from(1, GOOD | BEST));
    w.node(0).on_message(mark_from(2, GOOD | BEST));  // engage chain live
    REQUIRE(w.node(0).engage_live());
    w.node(0).appearance(3);
    CHECK(ominus(w.node(0).tau_sch(), w.node(0).tau(), p.tau_max) == p.T);
    CHECK(w.node(0).k_A() == 1);
    CHECK(w.node(0).trail().marks().empty());
    CHECK_FALSE(w.has_pending(w.absorb_group(0)));
    CHECK_FALSE(w.has_pending(w.engage_group(0)));
    auto D2 = w.of(Kind::D2);
    REQUIRE(D2.size() == 1);
    CHECK(D2[0].a == w.node(0).tau_sch());
    CHECK(w.of(Kind::H).at(0).a == 3);
    const auto blank = p.delta3.ceil_int();
    for (int k = 0; k + 1 < blank; ++k) {
        w.tick(0);
        w.node(0).on_message(mark_from(1, GOOD));
    }
    CHECK(w.node(0).trail().marks().empty());
    w.tick(0);
    w.node(0).on_message(mark_from(1, GOOD));
    CHECK(w.node(0).trail().marks().size() == 1);
    for (int k = 0; k < 50; ++k) w.tick(0);
    CHECK(w.count(Kind::D0) == 0);
    CHECK(w.count(Kind::D1) == 0);
}

TEST_CASE("new trail: happy, engaging, nothing") {
    const auto& p = params();
    SUBCASE("happy -> no help") {
        World w(p, 1);
        w.auto_deliver = false;
        NodeInit s;
        s.tau = 700;
        s.tau_sch = 9000;
        w.node(0).init(s);
        for (int q = 1; q < 4; ++q) w.node(0).on_message(mark_from(q, GOOD | BEST));
        CHECK(w.node(0).is_happy());
        int g0 = w.count(Kind::G0);
        w.tick(0);
        CHECK(w.count(Kind::G0) == g0);
        CHECK(w.count(Kind::L2) == 1);
    }
    SUBCASE("engaging but unhappy -> L1 and help") {
        World w(p, 1);
        w.auto_deliver = false;
        NodeInit s;
        s.tau = 700;
        s.tau_sch = 9000;
        w.node(0).init(s);
        w.node(0).on_message(mark_from(1, GOOD | BEST));
        w.node(0).on_message(mark_from(2, GOOD | BEST));
        CHECK(w.count(Kind::L1) == 1);
        CHECK(w.count(Kind::G0) == 1);
        CHECK_FALSE(w.node(0).is_happy());
    }
    SUBCASE("nothing -> help only") {
        World w(p, 1);
        w.auto_deliver = false;
        NodeInit s;
        s.tau = 700;
        s.tau_sch = 9000;
        w.node(0).init(s);
        w.tick(0);
        CHECK(w.count(Kind::G0) == 1);
        CHECK(w.count(Kind::L1) == 0);
        CHECK(w.count(Kind::L2) == 0);
    }
}

TEST_CASE("out-of-range state is clamped") {
    const auto& p = params();
    World w(p, 1);
    NodeInit s;
    s.tau = p.tau_max + 5;
    s.tau_sch = -3;
    s.k_A = 3 * p.K_A + 2;
    s.v_left = -7;
    s.relax_left = 1 << 30;
    w.node(0).init(s);
    CHECK(w.node(0).tau() == 5);
    CHECK(w.node(0).tau_sch() == p.tau_max - 3);
    CHECK(w.node(0).k_A() == 2);
    CHECK(w.node(0).v_closed());
    CHECK_FALSE(w.node(0).relax_closed());
}

TEST_CASE("C and R records carry the observation flags") {
    const auto& p = params();
    World w(p, 1);
    w.auto_deliver = false;
    NodeInit s;
    s.tau = 700;
    s.tau_sch = 9000;
    w.node(0).init(s);
    for (int q = 1; q < 4; ++q) w.node(0).on_message(mark_from(q, GOOD | BEST));
    auto R = w.of(Kind::R);
    REQUIRE(R.size() == 3);
    CHECK((R[0].x & 1) == 0);
    CHECK((R[2].x & 1) == 1);
    CHECK(R[2].a == 3);
    CHECK(R[2].b == (GOOD | BEST));
    w.tick(0);
    CHECK((w.of(Kind::C).back().b & 1) == 1);
}
