#pragma once

#include "detloop/program.hpp"
#include "detloop/value.hpp"

#include <cstdint>
#include <vector>

namespace detloop {

// The runtime side of the opcode interpreter. on_opcode fires exactly once
// per executed opcode, BEFORE its effect: that is where the deterministic
// clock ticks and the physical cost is charged, so a builtin that reads the
// clock already sees its own call's tick.
class VmHost {
public:
    virtual ~VmHost() = default;
    virtual void on_opcode(const Opcode& op) = 0;
    virtual Value on_builtin(Builtin builtin, std::vector<Value>&& args) = 0;
};

// Executes one task (the top level, or one callback) to completion.
// Run-to-completion is structural: nothing can interleave until run_task
// returns. Globals persist across tasks.
class Vm {
public:
    Vm(const Program& prog, VmHost& host);

    // `args` must match the callee's arity. Returns the task's value (Unit
    // for the top level). Throws VmTrapError / StepBudgetExceeded.
    Value run_task(TaskRef task, std::vector<Value> args, std::uint64_t step_budget);

    std::vector<Value>& globals() { return globals_; }
    const std::vector<Value>& globals() const { return globals_; }

private:
    struct CallFrame {
        std::uint32_t ip;
        std::uint32_t end;
        std::vector<Value> locals;
        std::size_t stack_base;
    };

    Value pop();
    std::int64_t pop_int();

    const Program& prog_;
    VmHost& host_;
    std::vector<Value> globals_;
    std::vector<Value> stack_;
    std::vector<CallFrame> frames_;
};

// Division with round-half-up semantics, ties away from zero; the one piece
// of arithmetic the measurement scripts rely on. Exposed for direct testing.
// Traps on division by zero and INT64_MIN / -1.
std::int64_t div_round_half_up(std::int64_t a, std::int64_t b);

}  // namespace detloop
