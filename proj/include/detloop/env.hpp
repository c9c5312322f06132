#pragma once

#include "detloop/clocks.hpp"
#include "detloop/program.hpp"
#include "detloop/rf.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

namespace detloop {

// Linear latency model for one auxiliary service: base + magnitude * per_unit.
struct ServiceRate {
    VirtualTime base = 1;
    VirtualTime per_unit = 0;
};

// A simulated machine: what each opcode costs physically, how long each
// auxiliary service takes, and an optional seeded jitter. Two profiles with
// the same seed produce bit-identical jitter streams; the stream is shared
// between opcode and service draws in call order.
//
// The jitter generator is xorshift64* (documented bit-exactly in
// docs/lowering.md): state s != 0; each draw does
//   s ^= s >> 12; s ^= s << 25; s ^= s >> 27; raw = s * 0x2545F4914F6CDD1D
// and maps raw to an offset in [-amplitude, +amplitude] via
//   offset = raw % (2*amplitude + 1) - amplitude.
// Costs are clamped to stay >= 1. A seed of 0 is replaced by
// 0x9E3779B97F4A7C15. No draw is consumed when amplitude == 0.
class EnvironmentProfile {
public:
    EnvironmentProfile();

    // Parses {"opcode_cost": int|{mnemonic:int}, "services": {kind:{"base","per_unit"}},
    //         "jitter": int, "seed": int}. All keys optional; unknown keys are
    // rejected. `path` prefixes field paths in error messages.
    static EnvironmentProfile from_json(const nlohmann::json& doc, const std::string& path = "env");

    // Physical ticks for one executed opcode. Consumes one jitter draw when
    // the amplitude is nonzero.
    VirtualTime opcode_cost(Op op);

    // Physical ticks for a service request of the given magnitude (bytes or
    // work units). Consumes one jitter draw when the amplitude is nonzero.
    VirtualTime service_time(RfKind kind, std::int64_t magnitude);

    // Cheapest opcode under the worst-case downward jitter (floored at 1);
    // the runtime validates its clock unit against this.
    VirtualTime min_effective_opcode_cost() const;

    VirtualTime base_cost(Op op) const { return op_cost_[static_cast<std::size_t>(op)]; }
    const ServiceRate& service(RfKind kind) const;
    VirtualTime jitter_amplitude() const { return jitter_; }
    std::uint64_t seed() const { return seed_; }

    // Re-seeds and rewinds the jitter stream (CLI --seed override).
    void reseed(std::uint64_t seed);

private:
    std::uint64_t next_raw();
    VirtualTime jittered(VirtualTime base);

    std::array<VirtualTime, kOpCount> op_cost_;
    std::map<RfKind, ServiceRate> services_;
    VirtualTime jitter_ = 0;
    std::uint64_t seed_ = 1;
    std::uint64_t state_ = 1;
};

}  // namespace detloop
