#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "detloop/env.hpp"
#include "detloop/errors.hpp"
#include "detloop/frames.hpp"
#include "detloop/rf.hpp"

#include "json.hpp"

using namespace detloop;

namespace {

EnvironmentProfile flat_env() { return EnvironmentProfile{}; }

SpawnRequest timer_req(VirtualTime delay, bool repeating = false) {
    SpawnRequest req;
    req.kind = RfKind::Timer;
    req.delay = delay;
    req.repeating = repeating;
    return req;
}

SpawnRequest kind_req(RfKind kind, std::int64_t magnitude = 0) {
    SpawnRequest req;
    req.kind = kind;
    req.magnitude = magnitude;
    return req;
}

}  // namespace

TEST_CASE("kind names round trip") {
    for (int i = 0; i < kRfKindCount; ++i) {
        RfKind kind = static_cast<RfKind>(i);
        auto back = rf_kind_from_name(rf_kind_name(kind));
        REQUIRE(back.has_value());
        CHECK(*back == kind);
    }
    CHECK_FALSE(rf_kind_from_name("main").has_value());
}

TEST_CASE("clock policies per kind and mode") {
    auto det = ClockMode::Kind::Deterministic;
    auto leg = ClockMode::Kind::Legacy;
    CHECK(policy_for(RfKind::Timer, det) == ClockPolicy::DeterministicDelay);
    CHECK(policy_for(RfKind::NetworkCross, det) == ClockPolicy::DeterministicConstant);
    CHECK(policy_for(RfKind::DomOp, det) == ClockPolicy::DeterministicConstant);
    CHECK(policy_for(RfKind::ComputeSecret, det) == ClockPolicy::DeterministicConstant);
    CHECK(policy_for(RfKind::NetworkSame, det) == ClockPolicy::PhysicalTime);
    CHECK(policy_for(RfKind::VideoFrame, det) == ClockPolicy::PhysicalTime);
    CHECK(policy_for(RfKind::UserInput, det) == ClockPolicy::PhysicalTime);
    // the legacy baseline runs everything on physical time
    for (int i = 1; i < kRfKindCount; ++i)
        CHECK(policy_for(static_cast<RfKind>(i), leg) == ClockPolicy::PhysicalTime);
}

TEST_CASE("delivery constants") {
    RfConstants c;
    CHECK(c.constant_for(RfKind::DomOp) == 10);
    CHECK(c.constant_for(RfKind::NetworkCross) == 500'000);
    CHECK(c.constant_for(RfKind::ComputeSecret) == 1'000'000);
}

TEST_CASE("timer spawn fixes both clocks at request + delay") {
    FrameRegistry reg;
    auto env = flat_env();
    AuxFrame& f = reg.spawn(timer_req(100), /*main*/ 7, /*phys*/ 40, env, RfConstants{},
                            ClockMode::Kind::Deterministic, 1000);
    CHECK(f.id == 2);
    CHECK(f.due_phys == 140);
    REQUIRE(f.expected.has_value());
    CHECK(*f.expected == 107);
    CHECK(f.period == 100);

    AuxFrame& g = reg.spawn(timer_req(100), 7, 40, env, RfConstants{},
                            ClockMode::Kind::Legacy, 1000);
    CHECK(g.id == 3);
    CHECK(g.due_phys == 140);
    CHECK_FALSE(g.expected.has_value());  // physical policy: no promised slot
}

TEST_CASE("constant-policy kinds: physical finish from the service model, slot from the constant") {
    FrameRegistry reg;
    auto env = EnvironmentProfile::from_json(nlohmann::json{
        {"services", {{"network_cross", {{"base", 2000}, {"per_unit", 1}}}}}});
    SpawnRequest req = kind_req(RfKind::NetworkCross, 500);
    AuxFrame& f =
        reg.spawn(req, /*main*/ 3, /*phys*/ 10, env, RfConstants{}, ClockMode::Kind::Deterministic, 1000);
    CHECK(f.due_phys == 10 + 2000 + 500);
    REQUIRE(f.expected.has_value());
    CHECK(*f.expected == 3 + 500'000);

    AuxFrame& g =
        reg.spawn(req, 3, 10, env, RfConstants{}, ClockMode::Kind::Legacy, 1000);
    CHECK(g.due_phys == 10 + 2000 + 500);
    CHECK_FALSE(g.expected.has_value());
}

TEST_CASE("video frames land on the next period boundary strictly after now") {
    FrameRegistry reg;
    auto env = flat_env();
    const VirtualTime period = 100;
    auto due_at = [&](VirtualTime phys) {
        SpawnRequest req = kind_req(RfKind::VideoFrame);
        return reg.spawn(req, 0, phys, env, RfConstants{}, ClockMode::Kind::Deterministic, period)
            .due_phys;
    };
    CHECK(due_at(0) == 100);    // never "now", always the next edge
    CHECK(due_at(99) == 100);
    CHECK(due_at(100) == 200);  // on an edge: the following one
    CHECK(due_at(101) == 200);
}

TEST_CASE("scripted user input arrives at its absolute time, clamped to now") {
    FrameRegistry reg;
    auto env = flat_env();
    SpawnRequest req = kind_req(RfKind::UserInput);
    req.absolute_due = 500;
    req.payload = 42;
    AuxFrame& f = reg.spawn(req, 0, 100, env, RfConstants{}, ClockMode::Kind::Deterministic, 1000);
    CHECK(f.due_phys == 500);
    CHECK(f.payload == 42);

    req.absolute_due = 50;  // already in the past: deliver now
    AuxFrame& g = reg.spawn(req, 0, 100, env, RfConstants{}, ClockMode::Kind::Deterministic, 1000);
    CHECK(g.due_phys == 100);
}

TEST_CASE("spawn validation") {
    FrameRegistry reg;
    auto env = flat_env();
    auto spawn = [&](const SpawnRequest& req) {
        reg.spawn(req, 0, 0, env, RfConstants{}, ClockMode::Kind::Deterministic, 1000);
    };

    SpawnRequest no_delay = kind_req(RfKind::Timer);
    CHECK_THROWS_AS(spawn(no_delay), FrameError);

    SpawnRequest delayed_fetch = kind_req(RfKind::NetworkCross);
    delayed_fetch.delay = 5;
    CHECK_THROWS_AS(spawn(delayed_fetch), FrameError);

    SpawnRequest repeating_dom = kind_req(RfKind::DomOp);
    repeating_dom.repeating = true;
    CHECK_THROWS_AS(spawn(repeating_dom), FrameError);

    SpawnRequest negative = kind_req(RfKind::ComputeSecret, -1);
    CHECK_THROWS_AS(spawn(negative), VmTrapError);
}

TEST_CASE("complete: gating, stamps and error cases") {
    FrameRegistry reg;
    auto env = flat_env();
    AuxFrame& timer = reg.spawn(timer_req(100), 0, 0, env, RfConstants{},
                                ClockMode::Kind::Deterministic, 1000);
    const std::uint64_t id = timer.id;

    CHECK_THROWS_AS(reg.complete(id, 99), FrameError);  // not yet physically done
    CompletionEvent ev = reg.complete(id, 100);
    CHECK(ev.frame == id);
    CHECK_FALSE(ev.phys_stamp.has_value());  // deterministic policy carries no stamp
    CHECK_THROWS_AS(reg.complete(id, 200), FrameError);     // already completed
    CHECK_THROWS_AS(reg.complete(9999, 200), FrameError);   // unknown id

    SpawnRequest input = kind_req(RfKind::UserInput);
    input.absolute_due = 70;
    AuxFrame& phys = reg.spawn(input, 0, 0, env, RfConstants{}, ClockMode::Kind::Deterministic, 1000);
    CompletionEvent pe = reg.complete(phys.id, 70);
    REQUIRE(pe.phys_stamp.has_value());
    CHECK(*pe.phys_stamp == 70);  // physical policy: stamp equals the due time
}

TEST_CASE("rearm is anchored to the previous slot") {
    FrameRegistry reg;
    auto env = flat_env();
    AuxFrame& f = reg.spawn(timer_req(100, /*repeating*/ true), 5, 9, env, RfConstants{},
                            ClockMode::Kind::Deterministic, 1000);
    CHECK(*f.expected == 105);
    CHECK(f.due_phys == 109);
    reg.complete(f.id, 500);  // delivered late: physically done long after due
    reg.rearm(f);
    CHECK_FALSE(f.completed);
    // anchored to the old slot, not to when it was actually serviced
    CHECK(*f.expected == 205);
    CHECK(f.due_phys == 209);
    reg.complete(f.id, 500);
    reg.rearm(f);
    CHECK(*f.expected == 305);
    CHECK(f.due_phys == 309);
}

TEST_CASE("next_due scans in-flight frames and breaks ties by id") {
    FrameRegistry reg;
    auto env = flat_env();
    CHECK(reg.next_due() == nullptr);
    CHECK(reg.live_count() == 0);

    AuxFrame& a = reg.spawn(timer_req(300), 0, 0, env, RfConstants{},
                            ClockMode::Kind::Deterministic, 1000);
    AuxFrame& b = reg.spawn(timer_req(100), 0, 0, env, RfConstants{},
                            ClockMode::Kind::Deterministic, 1000);
    AuxFrame& c = reg.spawn(timer_req(100), 0, 0, env, RfConstants{},
                            ClockMode::Kind::Deterministic, 1000);
    CHECK(reg.live_count() == 3);
    REQUIRE(reg.next_due() != nullptr);
    CHECK(reg.next_due()->id == b.id);  // earliest due, lowest id among equals

    reg.complete(b.id, 100);
    CHECK(reg.next_due()->id == c.id);  // completed frames drop out of the scan
    CHECK(reg.live_count() == 2);

    reg.complete(c.id, 100);
    reg.complete(a.id, 300);
    CHECK(reg.next_due() == nullptr);
    CHECK(reg.live_count() == 0);

    reg.erase(a.id);
    CHECK(reg.find(a.id) == nullptr);
    CHECK(reg.find(b.id) != nullptr);
}

TEST_CASE("allocated ids never collide with spawned frames") {
    FrameRegistry reg;
    auto env = flat_env();
    std::uint64_t loose = reg.allocate_id();
    AuxFrame& f = reg.spawn(timer_req(1), 0, 0, env, RfConstants{},
                            ClockMode::Kind::Deterministic, 1000);
    CHECK(loose == 2);
    CHECK(f.id == 3);
    CHECK(reg.find(loose) == nullptr);  // no frame record behind a loose id
}
