#pragma once

#include "detloop/clocks.hpp"

#include <optional>
#include <string_view>

namespace detloop {

// Closed set of reference-frame kinds. MainJs is the script-running frame
// with the observer; the rest are auxiliary frames spawned by builtins or
// injected by the harness.
enum class RfKind : std::uint8_t {
    MainJs,
    Timer,
    NetworkCross,
    NetworkSame,
    DomOp,
    ComputeSecret,
    VideoFrame,
    UserInput,
};

inline constexpr int kRfKindCount = 8;

const char* rf_kind_name(RfKind kind);
std::optional<RfKind> rf_kind_from_name(std::string_view name);

// How an auxiliary frame's completion maps onto the main clock.
//   DeterministicConstant: delivered at request time + a per-kind constant.
//   DeterministicDelay:    delivered at request time + a caller-supplied delay.
//   PhysicalTime:          delivered when (and stamped where) it physically
//                          completes; the main clock synchronizes to the stamp.
enum class ClockPolicy : std::uint8_t {
    DeterministicConstant,
    DeterministicDelay,
    PhysicalTime,
};

// Per-kind delivery constants for the DeterministicConstant policy.
struct RfConstants {
    VirtualTime dom = 10;
    VirtualTime network_cross = 500'000;
    VirtualTime compute_secret = 1'000'000;

    VirtualTime constant_for(RfKind kind) const;
};

// Legacy mode strips the protection: every auxiliary kind completes on
// physical time, which is what makes the baseline measurably leaky.
ClockPolicy policy_for(RfKind kind, ClockMode::Kind mode);

}  // namespace detloop
