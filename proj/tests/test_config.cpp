#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "detloop/config.hpp"
#include "detloop/errors.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "json.hpp"

using namespace detloop;
using nlohmann::json;

TEST_CASE("defaults are a valid deterministic setup") {
    RuntimeConfig cfg = RuntimeConfig::from_json(json::object());
    CHECK(cfg.mode.kind == ClockMode::Kind::Deterministic);
    CHECK(cfg.unit == 1);
    CHECK(cfg.mode.grain == 1);
    CHECK(cfg.origin == "app.local");
    CHECK(cfg.frame_period == 16'666'667);
    CHECK(cfg.rf.dom == 10);
    CHECK(cfg.rf.network_cross == 500'000);
    CHECK(cfg.rf.compute_secret == 1'000'000);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("full document round trip") {
    json doc = {
        {"mode", "legacy"},
        {"unit", 2},
        {"grain", 1000},
        {"origin", "shop.example"},
        {"known_origins", {"cdn.example", "ads.example"}},
        {"step_budget", 5000},
        {"frame_period", 100},
        {"rf_constants", {{"dom", 7}, {"network_cross", 9}, {"compute_secret", 11}}},
        {"env", {{"opcode_cost", 3}}},
    };
    RuntimeConfig cfg = RuntimeConfig::from_json(doc);
    CHECK(cfg.mode.kind == ClockMode::Kind::Legacy);
    CHECK(cfg.mode.grain == 1000);
    CHECK(cfg.unit == 2);
    CHECK(cfg.origin == "shop.example");
    CHECK(cfg.step_budget == 5000);
    CHECK(cfg.frame_period == 100);
    CHECK(cfg.rf.dom == 7);
    CHECK(cfg.rf.network_cross == 9);
    CHECK(cfg.rf.compute_secret == 11);
    CHECK(cfg.env.base_cost(Op::PushConst) == 3);
}

TEST_CASE("unknown keys are rejected with their path") {
    try {
        RuntimeConfig::from_json(json{{"grian", 5}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path == "grian");
    }
    try {
        RuntimeConfig::from_json(json{{"rf_constants", {{"dum", 5}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path == "rf_constants.dum");
    }
    try {
        RuntimeConfig::from_json(json{{"env", {{"jitters", 5}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path == "env.jitters");
    }
}

TEST_CASE("bad field values are rejected") {
    CHECK_THROWS_AS(RuntimeConfig::from_json(json{{"mode", "fuzzy"}}), ConfigError);
    CHECK_THROWS_AS(RuntimeConfig::from_json(json{{"unit", 0}}), ConfigError);
    CHECK_THROWS_AS(RuntimeConfig::from_json(json{{"grain", 0}}), ConfigError);
    CHECK_THROWS_AS(RuntimeConfig::from_json(json{{"frame_period", 0}}), ConfigError);
    CHECK_THROWS_AS(RuntimeConfig::from_json(json{{"origin", ""}}), ConfigError);
    CHECK_THROWS_AS(RuntimeConfig::from_json(json{{"known_origins", "cdn.example"}}), ConfigError);
    CHECK_THROWS_AS(RuntimeConfig::from_json(json{{"step_budget", -1}}), ConfigError);
}

TEST_CASE("unit must not exceed the cheapest effective opcode cost") {
    // flat cost 3, jitter 1 -> effective minimum 2
    json doc = {{"unit", 2}, {"env", {{"opcode_cost", 3}, {"jitter", 1}}}};
    CHECK_NOTHROW(RuntimeConfig::from_json(doc));
    doc["unit"] = 3;
    CHECK_THROWS_AS(RuntimeConfig::from_json(doc), ConfigError);
}

TEST_CASE("the document origin is always known") {
    RuntimeConfig cfg = RuntimeConfig::from_json(
        json{{"origin", "app.local"}, {"known_origins", {"cdn.example"}}});
    CHECK(cfg.origin_known("app.local"));
    CHECK(cfg.origin_known("cdn.example"));
    CHECK_FALSE(cfg.origin_known("evil.example"));
    CHECK_FALSE(cfg.origin_known(""));
}

TEST_CASE("from_file reads and validates, and reports missing files") {
    const char* path = "detloop_test_config.json";
    {
        std::ofstream out(path);
        out << R"({"mode": "det", "unit": 1, "origin": "files.example"})";
    }
    RuntimeConfig cfg = RuntimeConfig::from_file(path);
    CHECK(cfg.origin == "files.example");
    std::remove(path);

    CHECK_THROWS_AS(RuntimeConfig::from_file("no/such/file.json"), ConfigError);

    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(RuntimeConfig::from_file(path), ConfigError);
    std::remove(path);
}
