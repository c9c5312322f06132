#include "detloop/program.hpp"

#include <array>
#include <sstream>

namespace detloop {

namespace {

constexpr std::array<const char*, kOpCount> kOpNames = {
    "push_const", "load_var", "store_var", "binary_op", "unary_op",
    "jump",       "jump_if_false", "call", "call_builtin", "return", "pop",
};

constexpr std::array<BuiltinSig, 9> kBuiltins = {{
    {"now", Builtin::Now, 0, 0, 0},
    {"output", Builtin::Output, 1, 0, 0},
    {"set_timeout", Builtin::SetTimeout, 2, 0b01, 0},
    {"set_interval", Builtin::SetInterval, 2, 0b01, 0},
    {"clear_interval", Builtin::ClearInterval, 1, 0, 0},
    {"fetch", Builtin::Fetch, 3, 0b100, 1},
    {"secret_sync", Builtin::SecretSync, 1, 0, 0},
    {"secret_async", Builtin::SecretAsync, 2, 0b10, 0},
    {"request_frame", Builtin::RequestFrame, 1, 0b1, 1},
}};

const char* bin_op_name(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
    }
    return "?";
}

}  // namespace

const char* op_name(Op op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<Op> op_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kOpNames.size(); i++) {
        if (name == kOpNames[i]) return static_cast<Op>(i);
    }
    return std::nullopt;
}

const BuiltinSig* builtin_by_name(std::string_view name) {
    for (const BuiltinSig& sig : kBuiltins) {
        if (name == sig.name) return &sig;
    }
    return nullptr;
}

const BuiltinSig& builtin_sig(Builtin b) {
    return kBuiltins[static_cast<std::size_t>(b)];
}

std::optional<std::uint32_t> Program::function_index(std::string_view name) const {
    for (std::size_t i = 0; i < functions.size(); i++) {
        if (functions[i].name == name) return static_cast<std::uint32_t>(i);
    }
    return std::nullopt;
}

std::string Program::disassemble() const {
    std::ostringstream out;
    auto describe = [&](const Opcode& oc) {
        out << op_name(oc.op);
        switch (oc.op) {
            case Op::PushConst: {
                const Value& v = pool[oc.a];
                if (v.kind == Value::Kind::Int) out << " " << v.i;
                else if (v.kind == Value::Kind::Str) out << " \"" << strings[v.s] << "\"";
                else out << " unit";
                break;
            }
            case Op::LoadVar:
            case Op::StoreVar:
                out << " " << (oc.b ? "global" : "local") << "#" << oc.a;
                if (oc.b && oc.a < global_names.size()) out << " (" << global_names[oc.a] << ")";
                break;
            case Op::BinaryOp:
                out << " " << bin_op_name(static_cast<BinOp>(oc.a));
                break;
            case Op::UnaryOp:
                out << " " << (static_cast<UnOp>(oc.a) == UnOp::Neg ? "-" : "!");
                break;
            case Op::Jump:
            case Op::JumpIfFalse:
                out << " -> " << oc.a;
                break;
            case Op::Call:
                out << " " << functions[oc.a].name;
                break;
            case Op::CallBuiltin:
                out << " " << builtin_sig(static_cast<Builtin>(oc.a)).name << "/" << oc.b;
                break;
            default:
                break;
        }
    };

    for (const FunctionInfo& fn : functions) {
        out << "function " << fn.name << " (arity " << fn.arity << ", locals "
            << fn.n_locals << "):\n";
        for (std::uint32_t pc = fn.entry; pc < fn.end; pc++) {
            out << "  " << pc << ": ";
            describe(code[pc]);
            out << "\n";
        }
    }
    if (has_top_level()) {
        out << "top-level:\n";
        for (std::uint32_t pc = top_entry; pc < top_end; pc++) {
            out << "  " << pc << ": ";
            describe(code[pc]);
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace detloop
