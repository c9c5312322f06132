#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace detloop {

// Everything thrown by the library derives from Error.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// 1-based source position.
struct SourcePos {
    int line = 1;
    int column = 1;
};

struct LexError : Error {
    LexError(SourcePos p, const std::string& msg)
        : Error("lex error at " + std::to_string(p.line) + ":" + std::to_string(p.column) +
                ": " + msg),
          pos(p) {}
    SourcePos pos;
};

struct ParseError : Error {
    ParseError(SourcePos p, const std::string& msg)
        : Error("parse error at " + std::to_string(p.line) + ":" + std::to_string(p.column) +
                ": " + msg),
          pos(p) {}
    SourcePos pos;
};

struct CompileError : Error {
    CompileError(SourcePos p, const std::string& msg)
        : Error("compile error at " + std::to_string(p.line) + ":" + std::to_string(p.column) +
                ": " + msg),
          pos(p) {}
    SourcePos pos;
};

enum class Trap : std::uint8_t {
    StackUnderflow,
    DivisionByZero,
    BadJump,
    IntegerOverflow,
    TypeMismatch,
    InvalidArgument,
    CallDepthExceeded,
};

const char* trap_name(Trap t);

struct VmTrapError : Error {
    VmTrapError(Trap t, const std::string& msg)
        : Error(std::string("vm trap (") + trap_name(t) + "): " + msg), trap(t) {}
    Trap trap;
};

// Clock arithmetic never wraps silently.
struct ClockOverflowError : Error {
    ClockOverflowError() : Error("virtual time overflow") {}
};

struct TargetInPastError : Error {
    TargetInPastError(std::uint64_t now, std::uint64_t target)
        : Error("fast_forward target " + std::to_string(target) + " is behind clock " +
                std::to_string(now)) {}
};

struct ConfigError : Error {
    ConfigError(const std::string& field_path, const std::string& msg)
        : Error("config error at '" + field_path + "': " + msg), path(field_path) {}
    std::string path;
};

enum class QueueFault : std::uint8_t { UnknownPlaceholder, AlreadyResolved };

struct QueueError : Error {
    QueueError(QueueFault f, std::uint64_t id)
        : Error(std::string(f == QueueFault::UnknownPlaceholder ? "unknown placeholder "
                                                                : "placeholder already resolved/canceled ") +
                std::to_string(id)),
          fault(f) {}
    QueueFault fault;
};

enum class FrameFault : std::uint8_t {
    PolicyMismatch,
    NotYetComplete,
    AlreadyCompleted,
    UnknownFrame,
    UnknownOrigin,
};

struct FrameError : Error {
    FrameError(FrameFault f, const std::string& msg)
        : Error("frame error: " + msg), fault(f) {}
    FrameFault fault;
};

struct StepBudgetExceeded : Error {
    explicit StepBudgetExceeded(std::uint64_t budget)
        : Error("task exceeded opcode budget of " + std::to_string(budget)) {}
};

struct PhysicalBudgetExceeded : Error {
    explicit PhysicalBudgetExceeded(std::uint64_t budget)
        : Error("run exceeded physical budget of " + std::to_string(budget) + " ticks") {}
};

struct NotRunError : Error {
    NotRunError() : Error("oracle report requested before run() completed") {}
};

struct TraceFormatError : Error {
    explicit TraceFormatError(const std::string& msg) : Error("malformed trace: " + msg) {}
};

}  // namespace detloop
