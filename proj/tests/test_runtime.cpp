#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "detloop/config.hpp"
#include "detloop/errors.hpp"
#include "detloop/runtime.hpp"
#include "detloop/trace.hpp"

#include <string>
#include <vector>

#include "json.hpp"

using namespace detloop;
using nlohmann::json;

namespace {

RuntimeConfig cfg_from(const json& doc) { return RuntimeConfig::from_json(doc); }

std::vector<std::int64_t> int_outputs(const Runtime& rt) {
    std::vector<std::int64_t> out;
    for (const OutputRecord& rec : rt.oracle_report().outputs)
        if (rec.value.kind == Value::Kind::Int) out.push_back(rec.value.i);
    return out;
}

struct DeliverView {
    int kase;
    std::string kind;
    VirtualTime priority;
    VirtualTime main;
    VirtualTime phys;
};

std::vector<DeliverView> delivers(const Runtime& rt) {
    std::vector<DeliverView> out;
    for (const TraceRecord& r : rt.trace().records)
        if (r.k == "deliver")
            out.push_back({r.detail.at("case").get<int>(),
                           r.detail.at("kind").get<std::string>(),
                           r.detail.at("priority").get<VirtualTime>(), r.main, r.phys});
    return out;
}

}  // namespace

TEST_CASE("a timer delivers by fast-forwarding the main clock to its slot") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function cb() { output(now()); } set_timeout(cb, 100);");
    rt.run();

    // set_timeout executes as the 3rd opcode, so the slot is 3 + 100 and the
    // callback's own now() tick lands one past it.
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{104});

    auto dv = delivers(rt);
    REQUIRE(dv.size() == 2);
    CHECK(dv[0].kind == "main_js");
    CHECK(dv[0].kase == 2);
    CHECK(dv[0].priority == 0);
    CHECK(dv[1].kind == "timer");
    CHECK(dv[1].kase == 1);
    CHECK(dv[1].priority == 103);
    CHECK(dv[1].main == 103);

    OracleReport rep = rt.oracle_report();
    CHECK(rep.total_main == 108);      // 4 top ops, jump to 103, 5 callback ops
    CHECK(rep.total_physical == 108);  // unit costs: physical mirrors the count
    CHECK(rt.opcode_count(0) == 9);
}

TEST_CASE("a physical result that arrives behind the main clock delivers in place") {
    json doc = {{"known_origins", {"cdn.example"}},
                {"env",
                 {{"services",
                   {{"network_cross", {{"base", 2000}, {"per_unit", 1}}},
                    {"network_same", {{"base", 1500}, {"per_unit", 1}}}}}}}};
    Runtime rt(cfg_from(doc));
    // cross fetch jumps main far ahead; the same-origin fetch then finishes
    // physically long before the main clock gets there
    rt.load("function s2(n) { output(now()); }\n"
            "function c1(n) { fetch(\"app.local\", 10, s2); }\n"
            "fetch(\"cdn.example\", 10, c1);");
    rt.run();

    auto dv = delivers(rt);
    REQUIRE(dv.size() == 3);
    CHECK(dv[1].kind == "network_cross");
    CHECK(dv[1].kase == 1);
    CHECK(dv[1].priority == 500'004);  // request at main 4 + the network constant
    CHECK(dv[2].kind == "network_same");
    CHECK(dv[2].kase == 2);            // behind the main clock: no jump
    CHECK(dv[2].priority == 3'528);    // its physical completion time
    CHECK(dv[2].main == 500'011);      // main stays where c1 left it

    // the same-origin payload stamps its physical completion
    const TraceRecord* same = nullptr;
    for (const TraceRecord& r : rt.trace().records)
        if (r.k == "deliver" && r.detail.at("kind") == "network_same") same = &r;
    REQUIRE(same != nullptr);
    CHECK(same->detail.at("stamp").get<VirtualTime>() == 3'528);

    CHECK(int_outputs(rt) == std::vector<std::int64_t>{500'012});
}

TEST_CASE("same-origin fetch callbacks receive the completion stamp as their argument") {
    json doc = {{"env", {{"services", {{"network_same", {{"base", 1000}, {"per_unit", 0}}}}}}}};
    Runtime rt(cfg_from(doc));
    rt.load("function got(ts) { output(ts); } fetch(\"app.local\", 5, got);");
    rt.run();
    // spawned at the 4th opcode: completes at 4 + 1000
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{1'004});
}

TEST_CASE("an empty queue stalls until the physical clock passes main, then jumps") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function on_message(m) { output(m); }");
    rt.load_second("");
    rt.send_cross_frame({/*sender*/ 1, /*receiver*/ 0, /*payload*/ 7, /*sent_at*/ 500});
    rt.run();

    auto dv = delivers(rt);
    // both top-level deliveries, then the message
    REQUIRE(dv.size() == 3);
    CHECK(dv[2].kind == "cross");
    CHECK(dv[2].kase == 1);
    CHECK(dv[2].priority == 500);
    CHECK(dv[2].main == 500);
    // nothing else to do: the holder blocked at phys 0 == main 0, and one
    // physical step was enough to let the future-stamped message through
    CHECK(dv[2].phys == 1);
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{7});
}

TEST_CASE("a message from the past delivers at the receiver's clock without moving it") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function on_message(m) { output(now()); } let x = 1;");
    rt.load_second("");
    rt.send_cross_frame({1, 0, 7, /*sent_at*/ 0});
    rt.run();

    auto dv = delivers(rt);
    REQUIRE(dv.size() == 3);
    CHECK(dv[1].kind == "cross");   // rf0's queue drains before rf1's top level
    CHECK(dv[1].kase == 2);
    CHECK(dv[1].priority == 0);
    CHECK(dv[1].main == 2);         // the two top-level opcodes already ran
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{3});
}

TEST_CASE("cross-frame messages validate their endpoints") {
    Runtime rt(cfg_from(json::object()));
    rt.load("");
    CHECK_THROWS_AS(rt.send_cross_frame({0, 0, 1, 0}), std::logic_error);
    CHECK_THROWS_AS(rt.send_cross_frame({0, 1, 1, 0}), std::logic_error);  // no second frame
}

TEST_CASE("a message handler with the wrong arity is a policy error") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function on_message(a, b) { return 0; }");
    rt.load_second("");
    rt.send_cross_frame({1, 0, 5, 0});
    try {
        rt.run();
        FAIL("expected FrameError");
    } catch (const FrameError& e) {
        CHECK(e.fault == FrameFault::PolicyMismatch);
    }
}

TEST_CASE("a message with no handler is consumed silently") {
    Runtime rt(cfg_from(json::object()));
    rt.load("let x = 1;");
    rt.load_second("");
    rt.send_cross_frame({1, 0, 5, 0});
    rt.run();
    CHECK(int_outputs(rt).empty());
}

TEST_CASE("synchronous secret work charges the observer a flat constant") {
    for (int cost : {1, 3}) {
        json doc = {{"env",
                     {{"opcode_cost", cost},
                      {"services", {{"compute_secret", {{"base", 500}, {"per_unit", 5}}}}}}}};
        Runtime rt(cfg_from(doc));
        rt.load("let a = now();\nsecret_sync(999);\nlet b = now();\noutput(b - a);");
        rt.run();
        // 5 opcode ticks between the reads plus the flat charge of 10,
        // independent of how fast the machine runs
        CHECK(int_outputs(rt) == std::vector<std::int64_t>{15});
    }
}

TEST_CASE("synchronous secret work costs real physical time proportional to the work") {
    json doc = {{"env", {{"services", {{"compute_secret", {{"base", 500}, {"per_unit", 5}}}}}}}};
    auto total_phys = [&](std::int64_t work) {
        Runtime rt(cfg_from(doc));
        rt.load("let a = now();\nsecret_sync(" + std::to_string(work) +
                ");\nlet b = now();\noutput(b - a);");
        rt.run();
        return rt.oracle_report().total_physical;
    };
    CHECK(total_phys(10'000) - total_phys(10) == 5 * 9'990);
}

TEST_CASE("asynchronous secret work delivers at a constant slot regardless of work") {
    json doc = {{"env", {{"services", {{"compute_secret", {{"base", 500}, {"per_unit", 5}}}}}}}};
    std::vector<std::int64_t> seen;
    for (std::int64_t work : {7, 70'000}) {
        Runtime rt(cfg_from(doc));
        rt.load("function d() { output(now()); } secret_async(" + std::to_string(work) + ", d);");
        rt.run();
        auto out = int_outputs(rt);
        REQUIRE(out.size() == 1);
        seen.push_back(out[0]);
    }
    CHECK(seen[0] == 1'000'004);  // request at main 3 + the compute constant, + now()'s tick
    CHECK(seen[0] == seen[1]);
}

TEST_CASE("one-shot, interval and cancellation together") {
    Runtime rt(cfg_from(json::object()));
    rt.load("let t1 = 0;\n"
            "let t2 = 0;\n"
            "let count = 0;\n"
            "function once() {\n"
            "  output(now());\n"
            "}\n"
            "function rep() {\n"
            "  count = count + 1;\n"
            "  if (count == 3) {\n"
            "    clear_interval(t2);\n"
            "    output(count);\n"
            "  }\n"
            "}\n"
            "t1 = set_timeout(once, 500);\n"
            "t2 = set_interval(rep, 200);\n"
            "output(now());\n");
    rt.run();
    // top level reads 15; the one-shot lands at slot 509 (read 510); the
    // interval at 213/413/613 stops itself on the third fire
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{15, 510, 3});
}

TEST_CASE("clearing a pending timer cancels its reserved slot") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function cb() { output(1); } let t = set_timeout(cb, 500); clear_interval(t);");
    rt.run();
    CHECK(int_outputs(rt).empty());
    CHECK(rt.oracle_report().total_physical < 500);  // nothing waited for the slot
}

TEST_CASE("clear_interval ignores junk ids") {
    Runtime rt(cfg_from(json::object()));
    rt.load("clear_interval(0 - 7); clear_interval(9999); output(1);");
    rt.run();
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{1});
}

TEST_CASE("an interval cleared after its fire is queued still fires that one last time") {
    // slow machine: the compute result physically lands only after the 34th
    // interval fire, so that fire is already completed and queued when the
    // compute callback clears the interval
    json doc = {{"env", {{"opcode_cost", 3},
                         {"services", {{"compute_secret", {{"base", 1500}, {"per_unit", 15}}}}}}}};
    Runtime rt(cfg_from(doc));
    rt.load("let u = 30000;\n"
            "let h = 0;\n"
            "let fires = 0;\n"
            "function tick() {\n"
            "  fires = fires + 1;\n"
            "}\n"
            "function done() {\n"
            "  clear_interval(h);\n"
            "  output(fires * u);\n"
            "}\n"
            "h = set_interval(tick, u);\n"
            "secret_async(200000, done);\n");
    rt.run();
    // 33 interval slots fit below the compute slot; the 34th fire (already
    // completed when done() clears) is delivered but no longer counted
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{990'000});
    int timer_deliveries = 0;
    for (const TraceRecord& r : rt.trace().records)
        if (r.k == "deliver" && r.detail.at("kind") == "timer") ++timer_deliveries;
    CHECK(timer_deliveries == 34);
}

TEST_CASE("scripted input is delivered at its absolute physical time") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function on_input(v) { output(v); output(now()); }");
    rt.inject_input(1'000, 99);
    rt.run();
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{99, 1'004});

    const TraceRecord* in = nullptr;
    for (const TraceRecord& r : rt.trace().records)
        if (r.k == "deliver" && r.detail.at("kind") == "user_input") in = &r;
    REQUIRE(in != nullptr);
    CHECK(in->detail.at("stamp").get<VirtualTime>() == 1'000);
    CHECK(in->main == 1'000);  // synchronized: delivered exactly at its stamp
    CHECK(in->detail.at("payload").get<std::int64_t>() == 99);
}

TEST_CASE("input with no handler drains without effect") {
    Runtime rt(cfg_from(json::object()));
    rt.load("output(1);");
    rt.inject_input(50, 3);
    rt.run();
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{1});
}

TEST_CASE("an animation-frame chain delivers every frame at its stamp") {
    json doc = {{"frame_period", 1000}};
    Runtime rt(cfg_from(doc));
    rt.load("let k = 0;\n"
            "function paint(ts) {\n"
            "  k = k + 1;\n"
            "  if (k < 5) {\n"
            "    request_frame(paint);\n"
            "  }\n"
            "  output(ts);\n"
            "}\n"
            "request_frame(paint);\n");
    rt.run();
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{1'000, 2'000, 3'000, 4'000, 5'000});
    for (const TraceRecord& r : rt.trace().records) {
        if (r.k == "deliver" && r.detail.contains("stamp"))
            CHECK(r.main == r.detail.at("stamp").get<VirtualTime>());
    }
}

TEST_CASE("legacy scripts read the quantized physical clock") {
    json doc = {{"mode", "legacy"}, {"grain", 1000}, {"env", {{"opcode_cost", 700}}}};
    Runtime rt(cfg_from(doc));
    rt.load("now(); output(now());");
    rt.run();
    // the second read happens at physical 2100, floored to the grain
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{2'000});
    CHECK(rt.oracle_report().total_physical == 3'500);

    json det_doc = {{"env", {{"opcode_cost", 700}}}};
    Runtime det(cfg_from(det_doc));
    det.load("now(); output(now());");
    det.run();
    CHECK(int_outputs(det) == std::vector<std::int64_t>{3});  // one tick per opcode
}

TEST_CASE("unknown fetch origins fail loudly") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function cb(n) { return 0; } fetch(\"evil.example\", 1, cb);");
    try {
        rt.run();
        FAIL("expected FrameError");
    } catch (const FrameError& e) {
        CHECK(e.fault == FrameFault::UnknownOrigin);
    }
}

TEST_CASE("negative magnitudes and delays trap") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function cb() { return 0; } set_timeout(cb, 0 - 5);");
    try {
        rt.run();
        FAIL("expected VmTrapError");
    } catch (const VmTrapError& e) {
        CHECK(e.trap == Trap::InvalidArgument);
    }

    Runtime rt2(cfg_from(json::object()));
    rt2.load("function cb(n) { return 0; } fetch(\"app.local\", 0 - 1, cb);");
    CHECK_THROWS_AS(rt2.run(), VmTrapError);
}

TEST_CASE("step budget cuts off runaway tasks") {
    Runtime rt(cfg_from(json{{"step_budget", 100}}));
    rt.load("let i = 0; while (true) { i = i + 1; }");
    CHECK_THROWS_AS(rt.run(), StepBudgetExceeded);
}

TEST_CASE("physical budget bounds a run") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function cb() { output(1); } set_timeout(cb, 1000);");
    CHECK_THROWS_AS(rt.run(/*physical_budget*/ 50), PhysicalBudgetExceeded);
}

TEST_CASE("the oracle report exists only after a completed run") {
    Runtime rt(cfg_from(json::object()));
    rt.load("output(1);");
    CHECK_THROWS_AS(rt.oracle_report(), NotRunError);
    rt.run();
    CHECK_NOTHROW(rt.oracle_report());
}

TEST_CASE("lifecycle misuse is a programming error") {
    Runtime rt(cfg_from(json::object()));
    CHECK_THROWS_AS(rt.run(), std::logic_error);
    CHECK_THROWS_AS(rt.inject_input(1, 1), std::logic_error);
    rt.load("");
    CHECK_THROWS_AS(rt.load("output(1);"), std::logic_error);
    rt.load_second("");
    CHECK_THROWS_AS(rt.load_second(""), std::logic_error);
}

TEST_CASE("the trace audits the clocks") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function cb() { output(now()); } set_timeout(cb, 40); let x = now();");
    rt.run();

    std::size_t ops = 0;
    VirtualTime last_phys = 0;
    VirtualTime last_main_rf0 = 0;
    for (const TraceRecord& r : rt.trace().records) {
        if (r.k == "op") ++ops;
        CHECK(r.phys >= last_phys);
        last_phys = r.phys;
        if (r.frame == 0) {
            CHECK(r.main >= last_main_rf0);
            last_main_rf0 = r.main;
        }
        CHECK((r.k == "op" || r.k == "deliver" || r.k == "spawn" || r.k == "out"));
    }
    CHECK(ops == rt.opcode_count(0));
}

TEST_CASE("a run can be extended with more input and resumed") {
    Runtime rt(cfg_from(json::object()));
    rt.load("function on_input(v) { output(v); }");
    rt.run();
    CHECK(int_outputs(rt).empty());
    rt.inject_input(5, 123);
    rt.run();
    CHECK(int_outputs(rt) == std::vector<std::int64_t>{123});
}
