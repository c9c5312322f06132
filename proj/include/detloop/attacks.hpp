#pragma once

#include "detloop/config.hpp"
#include "detloop/runtime.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace detloop {

// The five measurement strategies of the harness. Each produces one integer
// measurement per variant run, extracted from the script's output() values:
//   ClockEdge          spin until now() changes, count iterations
//   ClockEdgeModified  align to an edge, then count fixed payloads per window
//   AsyncInterval      count interval fires racing a secret computation
//   ResourceSize       time one cross-origin fetch per size
//   ComputeFilter      count animation frames racing a secret computation
enum class AttackScenario {
    ClockEdge,
    ClockEdgeModified,
    AsyncInterval,
    ResourceSize,
    ComputeFilter,
};

inline constexpr std::array<AttackScenario, 5> kAllScenarios = {
    AttackScenario::ClockEdge,    AttackScenario::ClockEdgeModified,
    AttackScenario::AsyncInterval, AttackScenario::ResourceSize,
    AttackScenario::ComputeFilter,
};

const char* attack_scenario_name(AttackScenario s);
std::optional<AttackScenario> attack_scenario_from_name(std::string_view name);

// Script generators. The checked-in scenario files are the default
// instantiations of these (a test pins them together).
std::string clock_edge_source();
std::string clock_edge_modified_source(std::int64_t payload_iters = 100);
std::string async_interval_source(VirtualTime interval, std::int64_t work = 200'000);
std::string resource_size_source(const std::string& origin, std::int64_t size);
std::string compute_filter_source(std::int64_t work);
std::string sync_secret_source(std::int64_t work = 999);

// Variant parameters; defaults are what the stock matrix uses.
struct AttackParams {
    std::vector<VirtualTime> intervals = {30'000, 250'000};
    std::int64_t interval_work = 200'000;
    std::string cross_origin = "cdn.example";
    std::vector<std::int64_t> sizes = {100'000, 2'000'000, 5'000'000};
    std::vector<std::int64_t> filter_works = {250'000, 2'073'600};
    std::int64_t edge_payload_iters = 100;
};

// One variant: a self-contained script whose run yields one measurement.
struct AttackVariant {
    std::string label;
    std::string source;
};

std::vector<AttackVariant> attack_variants(AttackScenario s, const AttackParams& params);

// A named machine speed the matrix sweeps over.
struct AttackProfile {
    std::string name;
    EnvironmentProfile env;
};

// fast (cost 1), slow (cost 3, services x3), jittery (cost 2 +-1, services x2).
std::vector<AttackProfile> stock_attack_profiles();

// Base the matrix runs on: coarse legacy clock (grain 100000), 100000-tick
// frame period, and "cdn.example" as the known cross origin.
RuntimeConfig default_attack_config();

// Parses {"name": str, "env": {...}} (a profile file for the CLI).
AttackProfile attack_profile_from_json(const nlohmann::json& doc);

struct AttackRow {
    std::string scenario;
    std::string mode;     // "det" | "legacy"
    std::string profile;
    int run = 0;          // variant index (times repeats, when repeats > 1)
    std::int64_t value = 0;
};

// Runs one variant under one concrete config and returns its measurement
// values in output order (the stock scenarios emit exactly one).
std::vector<std::int64_t> run_variant(const AttackVariant& variant, const RuntimeConfig& config);

// The full sweep: scenarios x {det, legacy} x profiles x variants (x repeats).
// `base` supplies everything but mode and env. Rows come back sorted by
// (scenario, mode, profile, run).
std::vector<AttackRow> attack_matrix(const RuntimeConfig& base,
                                     const std::vector<AttackProfile>& profiles,
                                     const AttackParams& params = {}, int repeats = 1);

// Byte-stable JSON Lines, one row per line, already-sorted input preserved.
std::string attack_rows_jsonl(const std::vector<AttackRow>& rows);

// Can an observer tell the two sample sets apart? Disjoint multisets mean
// every observed value identifies its environment.
bool multisets_disjoint(std::vector<std::int64_t> a, std::vector<std::int64_t> b);

// Aggregated verdicts per scenario, derived from matrix rows.
struct ScenarioVerdict {
    std::string scenario;
    // Deterministic mode: every variant produced one single value across all
    // profiles and repeats.
    bool det_zero_variance = false;
    // Deterministic mode: no profile pair is distinguishable.
    bool det_all_pairs_overlap = false;
    // Legacy mode: profile pairs whose value multisets are disjoint.
    std::vector<std::pair<std::string, std::string>> legacy_disjoint_pairs;
};

std::vector<ScenarioVerdict> evaluate_rows(const std::vector<AttackRow>& rows);

}  // namespace detloop
