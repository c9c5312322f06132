#include "detloop/rf.hpp"

#include <stdexcept>
#include <string>

namespace detloop {

namespace {
constexpr const char* kNames[kRfKindCount] = {
    "main_js",        "timer",       "network_cross", "network_same",
    "dom_op",         "compute_secret", "video_frame", "user_input",
};
}  // namespace

const char* rf_kind_name(RfKind kind) { return kNames[static_cast<std::uint8_t>(kind)]; }

std::optional<RfKind> rf_kind_from_name(std::string_view name) {
    for (int i = 0; i < kRfKindCount; ++i)
        if (name == kNames[i]) return static_cast<RfKind>(i);
    return std::nullopt;
}

VirtualTime RfConstants::constant_for(RfKind kind) const {
    switch (kind) {
        case RfKind::DomOp: return dom;
        case RfKind::NetworkCross: return network_cross;
        case RfKind::ComputeSecret: return compute_secret;
        default:
            throw std::logic_error(std::string("no delivery constant for kind ") +
                                   rf_kind_name(kind));
    }
}

ClockPolicy policy_for(RfKind kind, ClockMode::Kind mode) {
    if (kind == RfKind::MainJs)
        throw std::logic_error("main frame has no auxiliary clock policy");
    if (mode == ClockMode::Kind::Legacy) return ClockPolicy::PhysicalTime;
    switch (kind) {
        case RfKind::Timer: return ClockPolicy::DeterministicDelay;
        case RfKind::NetworkCross:
        case RfKind::DomOp:
        case RfKind::ComputeSecret: return ClockPolicy::DeterministicConstant;
        case RfKind::NetworkSame:
        case RfKind::VideoFrame:
        case RfKind::UserInput: return ClockPolicy::PhysicalTime;
        case RfKind::MainJs: break;
    }
    throw std::logic_error("unreachable rf kind");
}

}  // namespace detloop
