#pragma once

#include "detloop/clocks.hpp"
#include "detloop/env.hpp"
#include "detloop/rf.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace detloop {

// Full runtime configuration. One JSON document:
//   {"mode": "det"|"legacy", "unit": int, "grain": int,
//    "origin": str, "known_origins": [str...], "step_budget": int,
//    "rf_constants": {"dom": int, "network_cross": int, "compute_secret": int},
//    "frame_period": int, "env": {...environment profile...}}
// Every key is optional; unknown keys are rejected with their field path.
struct RuntimeConfig {
    ClockMode mode;
    VirtualTime unit = 1;
    RfConstants rf;
    VirtualTime frame_period = 16'666'667;
    std::string origin = "app.local";
    std::vector<std::string> known_origins;  // document origin is always known
    std::uint64_t step_budget = 100'000'000;
    EnvironmentProfile env;

    static RuntimeConfig from_json(const nlohmann::json& doc);
    static RuntimeConfig from_file(const std::string& path);

    // Invariant checks (also run by from_json):
    //   - unit >= 1, grain >= 1, frame_period >= 1, constants >= 1
    //   - origin non-empty
    //   - unit <= cheapest effective opcode cost, so the main clock can never
    //     outrun the physical one during execution
    void validate() const;

    bool origin_known(const std::string& candidate) const;
};

}  // namespace detloop
