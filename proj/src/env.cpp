#include "detloop/env.hpp"

#include "detloop/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace detloop {

namespace {

constexpr std::uint64_t kSeedFallback = 0x9E3779B97F4A7C15ULL;

// Kinds that accept a service entry in profiles.
constexpr RfKind kServiceKinds[] = {RfKind::DomOp, RfKind::NetworkCross, RfKind::NetworkSame,
                                    RfKind::ComputeSecret};

VirtualTime require_positive(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
        throw ConfigError(path, "expected a positive integer");
    return static_cast<VirtualTime>(v.get<std::int64_t>());
}

VirtualTime require_non_negative(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ConfigError(path, "expected a non-negative integer");
    return static_cast<VirtualTime>(v.get<std::int64_t>());
}

}  // namespace

EnvironmentProfile::EnvironmentProfile() {
    op_cost_.fill(1);
    for (RfKind k : kServiceKinds) services_[k] = ServiceRate{};
    reseed(seed_);
}

void EnvironmentProfile::reseed(std::uint64_t seed) {
    seed_ = seed;
    state_ = seed == 0 ? kSeedFallback : seed;
}

std::uint64_t EnvironmentProfile::next_raw() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
}

VirtualTime EnvironmentProfile::jittered(VirtualTime base) {
    if (jitter_ == 0) return base;
    std::uint64_t span = 2 * jitter_ + 1;
    std::uint64_t draw = next_raw() % span;
    // draw in [0, 2a] maps to offset in [-a, +a].
    if (draw >= jitter_) return vt_add(base, draw - jitter_);
    VirtualTime down = jitter_ - draw;
    return down >= base ? 1 : base - down;
}

VirtualTime EnvironmentProfile::opcode_cost(Op op) {
    return jittered(op_cost_[static_cast<std::size_t>(op)]);
}

VirtualTime EnvironmentProfile::service_time(RfKind kind, std::int64_t magnitude) {
    if (magnitude < 0) throw std::logic_error("service magnitude must be non-negative");
    const ServiceRate& rate = service(kind);
    VirtualTime flat = vt_add(rate.base, vt_mul(rate.per_unit, static_cast<VirtualTime>(magnitude)));
    return jittered(flat);
}

VirtualTime EnvironmentProfile::min_effective_opcode_cost() const {
    VirtualTime lo = *std::min_element(op_cost_.begin(), op_cost_.end());
    return jitter_ >= lo ? 1 : lo - jitter_;
}

const ServiceRate& EnvironmentProfile::service(RfKind kind) const {
    auto it = services_.find(kind);
    if (it == services_.end())
        throw std::logic_error(std::string("kind has no service model: ") + rf_kind_name(kind));
    return it->second;
}

EnvironmentProfile EnvironmentProfile::from_json(const nlohmann::json& doc,
                                                 const std::string& path) {
    if (!doc.is_object()) throw ConfigError(path, "expected an object");
    EnvironmentProfile env;

    for (const auto& [key, value] : doc.items()) {
        if (key == "opcode_cost") {
            const std::string p = path + ".opcode_cost";
            if (value.is_number_integer()) {
                env.op_cost_.fill(require_positive(value, p));
            } else if (value.is_object()) {
                for (const auto& [mnemonic, cost] : value.items()) {
                    auto op = op_from_name(mnemonic);
                    if (!op) throw ConfigError(p + "." + mnemonic, "unknown opcode mnemonic");
                    env.op_cost_[static_cast<std::size_t>(*op)] =
                        require_positive(cost, p + "." + mnemonic);
                }
            } else {
                throw ConfigError(p, "expected an integer or an object of per-opcode costs");
            }
        } else if (key == "services") {
            const std::string p = path + ".services";
            if (!value.is_object()) throw ConfigError(p, "expected an object");
            for (const auto& [kname, entry] : value.items()) {
                const std::string kp = p + "." + kname;
                auto kind = rf_kind_from_name(kname);
                bool serviceable =
                    kind && std::find(std::begin(kServiceKinds), std::end(kServiceKinds), *kind) !=
                                std::end(kServiceKinds);
                if (!serviceable) throw ConfigError(kp, "not a serviceable frame kind");
                if (!entry.is_object()) throw ConfigError(kp, "expected an object");
                ServiceRate rate;
                for (const auto& [field, fv] : entry.items()) {
                    if (field == "base") {
                        rate.base = require_positive(fv, kp + ".base");
                    } else if (field == "per_unit") {
                        rate.per_unit = require_non_negative(fv, kp + ".per_unit");
                    } else {
                        throw ConfigError(kp + "." + field, "unknown key");
                    }
                }
                env.services_[*kind] = rate;
            }
        } else if (key == "jitter") {
            env.jitter_ = require_non_negative(value, path + ".jitter");
        } else if (key == "seed") {
            if (!value.is_number_unsigned() &&
                !(value.is_number_integer() && value.get<std::int64_t>() >= 0))
                throw ConfigError(path + ".seed", "expected a non-negative integer");
            env.reseed(value.get<std::uint64_t>());
        } else {
            throw ConfigError(path + "." + key, "unknown key");
        }
    }
    return env;
}

}  // namespace detloop
