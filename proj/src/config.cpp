#include "detloop/config.hpp"

#include "detloop/errors.hpp"

#include <algorithm>
#include <fstream>

namespace detloop {

namespace {

VirtualTime positive_field(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
        throw ConfigError(path, "expected a positive integer");
    return static_cast<VirtualTime>(v.get<std::int64_t>());
}

}  // namespace

RuntimeConfig RuntimeConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
    RuntimeConfig cfg;

    for (const auto& [key, value] : doc.items()) {
        if (key == "mode") {
            if (value == "det") {
                cfg.mode.kind = ClockMode::Kind::Deterministic;
            } else if (value == "legacy") {
                cfg.mode.kind = ClockMode::Kind::Legacy;
            } else {
                throw ConfigError("mode", "expected \"det\" or \"legacy\"");
            }
        } else if (key == "unit") {
            cfg.unit = positive_field(value, "unit");
        } else if (key == "grain") {
            cfg.mode.grain = positive_field(value, "grain");
        } else if (key == "origin") {
            if (!value.is_string()) throw ConfigError("origin", "expected a string");
            cfg.origin = value.get<std::string>();
        } else if (key == "known_origins") {
            if (!value.is_array()) throw ConfigError("known_origins", "expected an array");
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (!value[i].is_string())
                    throw ConfigError("known_origins[" + std::to_string(i) + "]",
                                      "expected a string");
                cfg.known_origins.push_back(value[i].get<std::string>());
            }
        } else if (key == "step_budget") {
            cfg.step_budget = positive_field(value, "step_budget");
        } else if (key == "rf_constants") {
            if (!value.is_object()) throw ConfigError("rf_constants", "expected an object");
            for (const auto& [ck, cv] : value.items()) {
                if (ck == "dom") {
                    cfg.rf.dom = positive_field(cv, "rf_constants.dom");
                } else if (ck == "network_cross") {
                    cfg.rf.network_cross = positive_field(cv, "rf_constants.network_cross");
                } else if (ck == "compute_secret") {
                    cfg.rf.compute_secret = positive_field(cv, "rf_constants.compute_secret");
                } else {
                    throw ConfigError("rf_constants." + ck, "unknown key");
                }
            }
        } else if (key == "frame_period") {
            cfg.frame_period = positive_field(value, "frame_period");
        } else if (key == "env") {
            cfg.env = EnvironmentProfile::from_json(value, "env");
        } else {
            throw ConfigError(key, "unknown key");
        }
    }

    cfg.validate();
    return cfg;
}

RuntimeConfig RuntimeConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("", "cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return from_json(doc);
}

void RuntimeConfig::validate() const {
    if (origin.empty()) throw ConfigError("origin", "must be non-empty");
    VirtualTime floor_cost = env.min_effective_opcode_cost();
    if (unit > floor_cost)
        throw ConfigError("unit", "clock unit " + std::to_string(unit) +
                                      " exceeds the cheapest effective opcode cost " +
                                      std::to_string(floor_cost) +
                                      "; the main clock would outrun the physical one");
}

bool RuntimeConfig::origin_known(const std::string& candidate) const {
    if (candidate == origin) return true;
    return std::find(known_origins.begin(), known_origins.end(), candidate) !=
           known_origins.end();
}

}  // namespace detloop
