#pragma once

#include <cstdint>

namespace detloop {

// Runtime value. Integers are 64-bit signed; strings exist only as opaque
// pool references (origins, labels); Unit is the result of value-less calls.
// Booleans are represented as integers 0/1.
struct Value {
    enum class Kind : std::uint8_t { Unit, Int, Str };

    Kind kind = Kind::Unit;
    std::int64_t i = 0;
    std::uint32_t s = 0;  // string pool index when kind == Str

    static Value unit() { return {}; }
    static Value integer(std::int64_t v) { return {Kind::Int, v, 0}; }
    static Value string_ref(std::uint32_t idx) { return {Kind::Str, 0, idx}; }

    bool truthy() const {
        switch (kind) {
            case Kind::Unit: return false;
            case Kind::Int: return i != 0;
            case Kind::Str: return true;
        }
        return false;
    }

    bool operator==(const Value&) const = default;
};

// Reference to a runnable task: the top-level code or a named function.
struct TaskRef {
    enum class Kind : std::uint8_t { TopLevel, Function };
    Kind kind = Kind::TopLevel;
    std::uint32_t fn = 0;

    static TaskRef top() { return {}; }
    static TaskRef function(std::uint32_t idx) { return {Kind::Function, idx}; }

    bool operator==(const TaskRef&) const = default;
};

}  // namespace detloop
