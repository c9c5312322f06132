#include "detloop/vm.hpp"

#include "detloop/errors.hpp"

#include <limits>

namespace detloop {

namespace {

constexpr std::size_t kMaxCallDepth = 256;

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw VmTrapError(Trap::IntegerOverflow, "addition overflowed");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r))
        throw VmTrapError(Trap::IntegerOverflow, "subtraction overflowed");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw VmTrapError(Trap::IntegerOverflow, "multiplication overflowed");
    return r;
}

std::uint64_t unsigned_abs(std::int64_t v) {
    return v < 0 ? ~static_cast<std::uint64_t>(v) + 1 : static_cast<std::uint64_t>(v);
}

}  // namespace

std::int64_t div_round_half_up(std::int64_t a, std::int64_t b) {
    if (b == 0) throw VmTrapError(Trap::DivisionByZero, "division by zero");
    if (a == std::numeric_limits<std::int64_t>::min() && b == -1)
        throw VmTrapError(Trap::IntegerOverflow, "division overflowed");
    std::int64_t q = a / b;
    std::int64_t r = a % b;
    if (r != 0 && 2 * unsigned_abs(r) >= unsigned_abs(b))
        q += (a < 0) == (b < 0) ? 1 : -1;
    return q;
}

Vm::Vm(const Program& prog, VmHost& host) : prog_(prog), host_(host) {
    globals_.assign(prog.global_names.size(), Value::unit());
}

Value Vm::pop() {
    if (stack_.empty()) throw VmTrapError(Trap::StackUnderflow, "operand stack is empty");
    Value v = stack_.back();
    stack_.pop_back();
    return v;
}

std::int64_t Vm::pop_int() {
    Value v = pop();
    if (v.kind != Value::Kind::Int)
        throw VmTrapError(Trap::TypeMismatch, "expected an integer operand");
    return v.i;
}

Value Vm::run_task(TaskRef task, std::vector<Value> args, std::uint64_t step_budget) {
    stack_.clear();
    frames_.clear();

    if (task.kind == TaskRef::Kind::TopLevel) {
        if (!args.empty()) throw std::logic_error("top-level task takes no arguments");
        CallFrame f{prog_.top_entry, prog_.top_end, {}, 0};
        f.locals.assign(prog_.top_locals, Value::unit());
        frames_.push_back(std::move(f));
    } else {
        const FunctionInfo& info = prog_.functions.at(task.fn);
        if (args.size() != info.arity) throw std::logic_error("task arity mismatch");
        CallFrame f{info.entry, info.end, {}, 0};
        f.locals.assign(info.arity + info.n_locals, Value::unit());
        for (std::size_t i = 0; i < args.size(); ++i) f.locals[i] = args[i];
        frames_.push_back(std::move(f));
    }

    std::uint64_t steps = 0;
    while (true) {
        CallFrame& f = frames_.back();
        if (f.ip >= f.end) {
            if (frames_.size() == 1 && task.kind == TaskRef::Kind::TopLevel) break;
            throw VmTrapError(Trap::BadJump, "execution fell off a function body");
        }
        if (++steps > step_budget) throw StepBudgetExceeded(step_budget);

        const Opcode& op = prog_.code[f.ip];
        host_.on_opcode(op);
        std::uint32_t next_ip = f.ip + 1;

        switch (op.op) {
            case Op::PushConst:
                stack_.push_back(prog_.pool.at(op.a));
                break;
            case Op::LoadVar:
                stack_.push_back(op.b ? globals_.at(op.a) : f.locals.at(op.a));
                break;
            case Op::StoreVar: {
                Value v = pop();
                (op.b ? globals_.at(op.a) : f.locals.at(op.a)) = v;
                break;
            }
            case Op::BinaryOp: {
                auto kind = static_cast<BinOp>(op.a);
                if (kind == BinOp::Eq || kind == BinOp::Ne) {
                    Value r = pop();
                    Value l = pop();
                    bool eq = l == r;
                    stack_.push_back(Value::integer(kind == BinOp::Eq ? eq : !eq));
                    break;
                }
                std::int64_t r = pop_int();
                std::int64_t l = pop_int();
                std::int64_t out = 0;
                switch (kind) {
                    case BinOp::Add: out = checked_add(l, r); break;
                    case BinOp::Sub: out = checked_sub(l, r); break;
                    case BinOp::Mul: out = checked_mul(l, r); break;
                    case BinOp::Div: out = div_round_half_up(l, r); break;
                    case BinOp::Mod:
                        if (r == 0) throw VmTrapError(Trap::DivisionByZero, "modulo by zero");
                        out = r == -1 ? 0 : l % r;
                        break;
                    case BinOp::Lt: out = l < r; break;
                    case BinOp::Le: out = l <= r; break;
                    case BinOp::Gt: out = l > r; break;
                    case BinOp::Ge: out = l >= r; break;
                    case BinOp::Eq:
                    case BinOp::Ne: break;  // handled above
                }
                stack_.push_back(Value::integer(out));
                break;
            }
            case Op::UnaryOp: {
                if (static_cast<UnOp>(op.a) == UnOp::Not) {
                    stack_.push_back(Value::integer(pop().truthy() ? 0 : 1));
                } else {
                    std::int64_t v = pop_int();
                    if (v == std::numeric_limits<std::int64_t>::min())
                        throw VmTrapError(Trap::IntegerOverflow, "negation overflowed");
                    stack_.push_back(Value::integer(-v));
                }
                break;
            }
            case Op::Jump:
                if (op.a > prog_.code.size())
                    throw VmTrapError(Trap::BadJump, "jump target out of range");
                next_ip = op.a;
                break;
            case Op::JumpIfFalse: {
                if (op.a > prog_.code.size())
                    throw VmTrapError(Trap::BadJump, "jump target out of range");
                if (!pop().truthy()) next_ip = op.a;
                break;
            }
            case Op::Call: {
                if (frames_.size() >= kMaxCallDepth)
                    throw VmTrapError(Trap::CallDepthExceeded,
                                      "call depth limit of " + std::to_string(kMaxCallDepth));
                const FunctionInfo& info = prog_.functions.at(op.a);
                if (stack_.size() < info.arity)
                    throw VmTrapError(Trap::StackUnderflow, "missing call arguments");
                CallFrame callee{info.entry, info.end, {}, 0};
                callee.locals.assign(info.arity + info.n_locals, Value::unit());
                for (std::uint32_t i = 0; i < info.arity; ++i)
                    callee.locals[info.arity - 1 - i] = pop();
                callee.stack_base = stack_.size();
                f.ip = next_ip;  // return address
                frames_.push_back(std::move(callee));
                continue;
            }
            case Op::CallBuiltin: {
                if (stack_.size() < op.b)
                    throw VmTrapError(Trap::StackUnderflow, "missing builtin arguments");
                std::vector<Value> bargs(op.b);
                for (std::uint32_t i = 0; i < op.b; ++i) bargs[op.b - 1 - i] = pop();
                stack_.push_back(host_.on_builtin(static_cast<Builtin>(op.a), std::move(bargs)));
                break;
            }
            case Op::Return: {
                Value result = pop();
                std::size_t base = f.stack_base;
                stack_.resize(base);
                frames_.pop_back();
                if (frames_.empty()) return result;
                stack_.push_back(result);
                continue;
            }
            case Op::Pop:
                pop();
                break;
        }
        frames_.back().ip = next_ip;
    }
    return Value::unit();
}

}  // namespace detloop
