#include "detloop/attacks.hpp"

#include "detloop/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace detloop {

const char* attack_scenario_name(AttackScenario s) {
    switch (s) {
        case AttackScenario::ClockEdge: return "clock-edge";
        case AttackScenario::ClockEdgeModified: return "clock-edge-modified";
        case AttackScenario::AsyncInterval: return "async-interval";
        case AttackScenario::ResourceSize: return "resource-size";
        case AttackScenario::ComputeFilter: return "compute-filter";
    }
    return "?";
}

std::optional<AttackScenario> attack_scenario_from_name(std::string_view name) {
    for (AttackScenario s : kAllScenarios)
        if (name == attack_scenario_name(s)) return s;
    return std::nullopt;
}

std::string clock_edge_source() {
    return
        "let t0 = now();\n"
        "let n = 0;\n"
        "while (now() == t0) {\n"
        "  n = n + 1;\n"
        "}\n"
        "output(n);\n";
}

std::string clock_edge_modified_source(std::int64_t payload_iters) {
    return
        "let t0 = now();\n"
        "while (now() == t0) {}\n"
        "let t1 = now();\n"
        "let reps = 0;\n"
        "let i = 0;\n"
        "let sink = 0;\n"
        "do {\n"
        "  i = 0;\n"
        "  while (i < " + std::to_string(payload_iters) + ") {\n"
        "    sink = sink + i;\n"
        "    i = i + 1;\n"
        "  }\n"
        "  reps = reps + 1;\n"
        "} while (now() == t1);\n"
        "output(reps);\n";
}

std::string async_interval_source(VirtualTime interval, std::int64_t work) {
    return
        "let u = " + std::to_string(interval) + ";\n"
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
        "secret_async(" + std::to_string(work) + ", done);\n";
}

std::string resource_size_source(const std::string& origin, std::int64_t size) {
    return
        "let t0 = 0;\n"
        "function got(n) {\n"
        "  output(now() - t0);\n"
        "}\n"
        "t0 = now();\n"
        "fetch(\"" + origin + "\", " + std::to_string(size) + ", got);\n";
}

std::string compute_filter_source(std::int64_t work) {
    return
        "let frames = 0;\n"
        "let going = 1;\n"
        "function paint(ts) {\n"
        "  if (going) {\n"
        "    frames = frames + 1;\n"
        "    request_frame(paint);\n"
        "  }\n"
        "}\n"
        "function done() {\n"
        "  going = 0;\n"
        "  output(frames);\n"
        "}\n"
        "request_frame(paint);\n"
        "secret_async(" + std::to_string(work) + ", done);\n";
}

std::string sync_secret_source(std::int64_t work) {
    return
        "let a = now();\n"
        "secret_sync(" + std::to_string(work) + ");\n"
        "let b = now();\n"
        "output(b - a);\n";
}

std::vector<AttackVariant> attack_variants(AttackScenario s, const AttackParams& p) {
    std::vector<AttackVariant> out;
    switch (s) {
        case AttackScenario::ClockEdge:
            out.push_back({"edge", clock_edge_source()});
            break;
        case AttackScenario::ClockEdgeModified:
            out.push_back({"payload-" + std::to_string(p.edge_payload_iters),
                           clock_edge_modified_source(p.edge_payload_iters)});
            break;
        case AttackScenario::AsyncInterval:
            for (VirtualTime u : p.intervals)
                out.push_back({"interval-" + std::to_string(u),
                               async_interval_source(u, p.interval_work)});
            break;
        case AttackScenario::ResourceSize:
            for (std::int64_t size : p.sizes)
                out.push_back({"size-" + std::to_string(size),
                               resource_size_source(p.cross_origin, size)});
            break;
        case AttackScenario::ComputeFilter:
            for (std::int64_t work : p.filter_works)
                out.push_back({"work-" + std::to_string(work), compute_filter_source(work)});
            break;
    }
    return out;
}

namespace {

nlohmann::json service_json(VirtualTime base, VirtualTime per_unit) {
    return {{"base", base}, {"per_unit", per_unit}};
}

nlohmann::json env_json(VirtualTime cost, VirtualTime jitter, std::uint64_t seed,
                        VirtualTime scale) {
    return {{"opcode_cost", cost},
            {"jitter", jitter},
            {"seed", seed},
            {"services",
             {{"network_cross", service_json(2'000 * scale, 1 * scale)},
              {"network_same", service_json(1'500 * scale, 1 * scale)},
              {"compute_secret", service_json(500 * scale, 5 * scale)},
              {"dom_op", service_json(100 * scale, 1 * scale)}}}};
}

}  // namespace

std::vector<AttackProfile> stock_attack_profiles() {
    std::vector<AttackProfile> out;
    out.push_back({"fast", EnvironmentProfile::from_json(env_json(1, 0, 1, 1), "env")});
    out.push_back({"slow", EnvironmentProfile::from_json(env_json(3, 0, 2, 3), "env")});
    out.push_back({"jittery", EnvironmentProfile::from_json(env_json(2, 1, 7, 2), "env")});
    return out;
}

RuntimeConfig default_attack_config() {
    RuntimeConfig cfg;
    cfg.mode.grain = 100'000;
    cfg.frame_period = 100'000;
    cfg.known_origins = {"cdn.example"};
    cfg.env = stock_attack_profiles().front().env;
    cfg.validate();
    return cfg;
}

AttackProfile attack_profile_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("profile", "expected an object");
    AttackProfile profile;
    for (const auto& [key, value] : doc.items()) {
        if (key == "name") {
            if (!value.is_string()) throw ConfigError("profile.name", "expected a string");
            profile.name = value.get<std::string>();
        } else if (key == "env") {
            profile.env = EnvironmentProfile::from_json(value, "profile.env");
        } else {
            throw ConfigError("profile." + key, "unknown key");
        }
    }
    if (profile.name.empty()) throw ConfigError("profile.name", "profile needs a name");
    return profile;
}

std::vector<std::int64_t> run_variant(const AttackVariant& variant, const RuntimeConfig& config) {
    Runtime rt(config);
    rt.load(variant.source);
    rt.run();
    std::vector<std::int64_t> values;
    for (const OutputRecord& rec : rt.oracle_report().outputs)
        if (rec.value.kind == Value::Kind::Int) values.push_back(rec.value.i);
    return values;
}

std::vector<AttackRow> attack_matrix(const RuntimeConfig& base,
                                     const std::vector<AttackProfile>& profiles,
                                     const AttackParams& params, int repeats) {
    std::vector<AttackRow> rows;
    for (AttackScenario s : kAllScenarios) {
        const std::vector<AttackVariant> variants = attack_variants(s, params);
        for (ClockMode::Kind mode :
             {ClockMode::Kind::Deterministic, ClockMode::Kind::Legacy}) {
            for (const AttackProfile& profile : profiles) {
                RuntimeConfig cfg = base;
                cfg.mode.kind = mode;
                cfg.env = profile.env;
                cfg.validate();
                int run = 0;
                for (const AttackVariant& variant : variants) {
                    for (int rep = 0; rep < repeats; ++rep, ++run) {
                        for (std::int64_t v : run_variant(variant, cfg)) {
                            rows.push_back({attack_scenario_name(s),
                                            mode == ClockMode::Kind::Deterministic ? "det"
                                                                                   : "legacy",
                                            profile.name, run, v});
                        }
                    }
                }
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const AttackRow& a, const AttackRow& b) {
        return std::tie(a.scenario, a.mode, a.profile, a.run, a.value) <
               std::tie(b.scenario, b.mode, b.profile, b.run, b.value);
    });
    return rows;
}

std::string attack_rows_jsonl(const std::vector<AttackRow>& rows) {
    std::string out;
    for (const AttackRow& row : rows) {
        nlohmann::ordered_json j;
        j["scenario"] = row.scenario;
        j["mode"] = row.mode;
        j["profile"] = row.profile;
        j["run"] = row.run;
        j["value"] = row.value;
        out += j.dump();
        out += '\n';
    }
    return out;
}

bool multisets_disjoint(std::vector<std::int64_t> a, std::vector<std::int64_t> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::int64_t> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return common.empty();
}

std::vector<ScenarioVerdict> evaluate_rows(const std::vector<AttackRow>& rows) {
    // scenario -> mode -> profile -> run -> values
    std::map<std::string,
             std::map<std::string, std::map<std::string, std::map<int, std::vector<std::int64_t>>>>>
        grouped;
    for (const AttackRow& r : rows) grouped[r.scenario][r.mode][r.profile][r.run].push_back(r.value);

    std::vector<ScenarioVerdict> verdicts;
    for (const auto& [scenario, by_mode] : grouped) {
        ScenarioVerdict v;
        v.scenario = scenario;

        if (auto det = by_mode.find("det"); det != by_mode.end()) {
            const auto& by_profile = det->second;
            // Zero variance: each run index maps to exactly one value, the
            // same one under every profile.
            bool constant = !by_profile.empty();
            std::map<int, std::int64_t> reference;
            for (const auto& [profile, by_run] : by_profile) {
                (void)profile;
                for (const auto& [run, values] : by_run) {
                    for (std::int64_t value : values) {
                        auto [it, fresh] = reference.emplace(run, value);
                        if (!fresh && it->second != value) constant = false;
                    }
                }
            }
            v.det_zero_variance = constant;

            bool all_overlap = true;
            for (auto a = by_profile.begin(); a != by_profile.end(); ++a) {
                for (auto b = std::next(a); b != by_profile.end(); ++b) {
                    std::vector<std::int64_t> va, vb;
                    for (const auto& [run, values] : a->second)
                        va.insert(va.end(), values.begin(), values.end());
                    for (const auto& [run, values] : b->second)
                        vb.insert(vb.end(), values.begin(), values.end());
                    if (multisets_disjoint(va, vb)) all_overlap = false;
                }
            }
            v.det_all_pairs_overlap = all_overlap;
        }

        if (auto legacy = by_mode.find("legacy"); legacy != by_mode.end()) {
            const auto& by_profile = legacy->second;
            for (auto a = by_profile.begin(); a != by_profile.end(); ++a) {
                for (auto b = std::next(a); b != by_profile.end(); ++b) {
                    std::vector<std::int64_t> va, vb;
                    for (const auto& [run, values] : a->second)
                        va.insert(va.end(), values.begin(), values.end());
                    for (const auto& [run, values] : b->second)
                        vb.insert(vb.end(), values.begin(), values.end());
                    if (multisets_disjoint(va, vb))
                        v.legacy_disjoint_pairs.emplace_back(a->first, b->first);
                }
            }
        }

        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

}  // namespace detloop
