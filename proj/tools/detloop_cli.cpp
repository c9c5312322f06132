// detloop: run scripts on the deterministic event loop, sweep the timing
// attack matrix, and diff traces for replay equality.

#include "detloop/attacks.hpp"
#include "detloop/errors.hpp"
#include "detloop/runtime.hpp"
#include "detloop/trace.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

using namespace detloop;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path, "cannot open file for writing");
    out << content;
}

RuntimeConfig load_config(const std::string& config_path, bool attack_defaults) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("DETLOOP_CONFIG")) path = env;
    }
    if (path.empty()) return attack_defaults ? default_attack_config() : RuntimeConfig{};
    return RuntimeConfig::from_file(path);
}

void apply_mode(RuntimeConfig& cfg, const std::string& mode) {
    if (mode.empty()) return;
    if (mode == "det") cfg.mode.kind = ClockMode::Kind::Deterministic;
    else if (mode == "legacy") cfg.mode.kind = ClockMode::Kind::Legacy;
    else throw ConfigError("--mode", "expected 'det' or 'legacy'");
}

std::vector<AttackProfile> load_profiles(const std::vector<std::string>& paths) {
    if (paths.empty()) return stock_attack_profiles();
    std::vector<AttackProfile> profiles;
    for (const std::string& path : paths) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text_file(path));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path, e.what());
        }
        profiles.push_back(attack_profile_from_json(doc));
    }
    return profiles;
}

int cmd_run(const std::string& script_path, const std::string& config_path,
            const std::string& mode, const std::string& trace_path, const std::string& format,
            std::uint64_t seed, bool seed_set) {
    RuntimeConfig cfg = load_config(config_path, false);
    apply_mode(cfg, mode);
    if (seed_set) cfg.env.reseed(seed);
    cfg.validate();

    Runtime rt(cfg);
    rt.load(read_text_file(script_path));
    const Trace& trace = rt.run();

    if (!trace_path.empty()) trace.write_file(trace_path);
    if (format == "jsonl") {
        std::cout << trace.to_jsonl();
        return 0;
    }
    const OracleReport report = rt.oracle_report();
    for (const OutputRecord& rec : report.outputs) {
        std::cout << "out main=" << rec.main << " phys=" << rec.phys << " value=";
        switch (rec.value.kind) {
            case Value::Kind::Int: std::cout << rec.value.i; break;
            case Value::Kind::Str: std::cout << '"' << rec.text << '"'; break;
            case Value::Kind::Unit: std::cout << "()"; break;
        }
        std::cout << '\n';
    }
    std::cout << "halt main=" << rt.main_now() << " phys=" << rt.physical_now()
              << " opcodes=" << rt.opcode_count() << '\n';
    return 0;
}

int cmd_attack(const std::string& config_path, const std::vector<std::string>& profile_paths,
               int runs, const std::string& out_path, const std::string& format,
               std::uint64_t seed, bool seed_set) {
    RuntimeConfig base = load_config(config_path, true);
    std::vector<AttackProfile> profiles = load_profiles(profile_paths);
    if (seed_set)
        for (AttackProfile& p : profiles) p.env.reseed(seed);

    const std::vector<AttackRow> rows = attack_matrix(base, profiles, AttackParams{}, runs);

    std::string payload;
    if (format == "table") {
        std::ostringstream ss;
        for (const AttackRow& row : rows) {
            ss << row.scenario << '\t' << row.mode << '\t' << row.profile << '\t' << row.run
               << '\t' << row.value << '\n';
        }
        payload = ss.str();
    } else {
        payload = attack_rows_jsonl(rows);
    }

    if (out_path.empty()) std::cout << payload;
    else write_text_file(out_path, payload);
    return 0;
}

int cmd_compare(const std::string& config_path, const std::vector<std::string>& profile_paths,
                int runs) {
    RuntimeConfig base = load_config(config_path, true);
    std::vector<AttackProfile> profiles = load_profiles(profile_paths);
    const std::vector<AttackRow> rows = attack_matrix(base, profiles, AttackParams{}, runs);

    bool ok = true;
    for (const ScenarioVerdict& v : evaluate_rows(rows)) {
        const bool det_ok = v.det_zero_variance && v.det_all_pairs_overlap;
        const bool legacy_leaks = !v.legacy_disjoint_pairs.empty();
        std::cout << v.scenario << ": det"
                  << (v.det_zero_variance ? " constant" : " VARIES")
                  << (v.det_all_pairs_overlap ? ", indistinguishable" : ", DISTINGUISHABLE")
                  << " | legacy distinguishes:";
        if (v.legacy_disjoint_pairs.empty()) std::cout << " none";
        for (const auto& [a, b] : v.legacy_disjoint_pairs) std::cout << ' ' << a << '|' << b;
        std::cout << '\n';
        if (!det_ok || !legacy_leaks) ok = false;
    }
    return ok ? 0 : 1;
}

int cmd_trace_diff(const std::string& a_path, const std::string& b_path) {
    const Trace a = Trace::from_file(a_path);
    const Trace b = Trace::from_file(b_path);
    const TraceDiff diff = diff_op_columns(a, b);
    if (diff.ok) {
        std::cout << "equal up to constant offset " << diff.offset << '\n';
        return 0;
    }
    std::cout << diff.message << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic event-loop runtime"};
    app.require_subcommand(1);

    std::string script_path, config_path, mode, trace_path, out_path;
    std::string format = "table";
    std::vector<std::string> profile_paths;
    int runs = 1;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "execute one script and print its outputs");
    run->add_option("script", script_path, "script file")->required();
    run->add_option("--config", config_path, "runtime config JSON");
    run->add_option("--mode", mode, "clock mode: det or legacy");
    run->add_option("--trace", trace_path, "write the trace to this file");
    run->add_option("--format", format, "table or jsonl")
        ->check(CLI::IsMember({"table", "jsonl"}));
    auto* run_seed = run->add_option("--seed", seed, "override the jitter seed");

    auto* attack = app.add_subcommand("attack", "run the timing-attack matrix");
    attack->add_option("--config", config_path, "base config JSON");
    attack->add_option("--profile", profile_paths, "profile JSON (repeatable)");
    attack->add_option("--runs", runs, "repeats per variant")->check(CLI::PositiveNumber);
    attack->add_option("--out", out_path, "write rows to this file");
    attack->add_option("--format", format, "jsonl or table")
        ->check(CLI::IsMember({"table", "jsonl"}));
    auto* attack_seed = attack->add_option("--seed", seed, "override the jitter seed");

    auto* compare = app.add_subcommand("compare", "attack matrix verdicts per scenario");
    compare->add_option("--config", config_path, "base config JSON");
    compare->add_option("--profile", profile_paths, "profile JSON (repeatable)");
    compare->add_option("--runs", runs, "repeats per variant")->check(CLI::PositiveNumber);

    std::string diff_a, diff_b;
    auto* tdiff = app.add_subcommand("trace-diff", "compare the op columns of two traces");
    tdiff->add_option("a", diff_a, "first trace (JSONL)")->required();
    tdiff->add_option("b", diff_b, "second trace (JSONL)")->required();

    // attack rows default to machine-readable output
    attack->callback([&] {
        if (attack->get_option("--format")->count() == 0) format = "jsonl";
    });

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(script_path, config_path, mode, trace_path, format, seed,
                           run_seed->count() > 0);
        if (attack->parsed())
            return cmd_attack(config_path, profile_paths, runs, out_path, format, seed,
                              attack_seed->count() > 0);
        if (compare->parsed()) return cmd_compare(config_path, profile_paths, runs);
        if (tdiff->parsed()) return cmd_trace_diff(diff_a, diff_b);
    } catch (const detloop::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const detloop::TraceFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const detloop::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
