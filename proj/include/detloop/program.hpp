#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detloop/value.hpp"

namespace detloop {

enum class Op : std::uint8_t {
    PushConst,    // a = constant pool index
    LoadVar,      // a = slot, b = 1 if global
    StoreVar,     // a = slot, b = 1 if global
    BinaryOp,     // a = BinOp
    UnaryOp,      // a = UnOp
    Jump,         // a = target opcode index
    JumpIfFalse,  // a = target opcode index (pops condition)
    Call,         // a = function index
    CallBuiltin,  // a = Builtin, b = argc
    Return,
    Pop,
};

inline constexpr std::size_t kOpCount = 11;

const char* op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

enum class BinOp : std::uint8_t { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge };
enum class UnOp : std::uint8_t { Neg, Not };

enum class Builtin : std::uint8_t {
    Now,
    Output,
    SetTimeout,
    SetInterval,
    ClearInterval,
    Fetch,
    SecretSync,
    SecretAsync,
    RequestFrame,
};

struct BuiltinSig {
    const char* name;
    Builtin builtin;
    std::uint8_t arity;
    // Argument positions that must be direct function names, and the arity
    // the named function must have.
    std::uint8_t fn_arg_mask;
    std::uint8_t fn_arg_arity;
};

const BuiltinSig* builtin_by_name(std::string_view name);
const BuiltinSig& builtin_sig(Builtin b);

struct Opcode {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;

    bool operator==(const Opcode&) const = default;
};

struct FunctionInfo {
    std::string name;
    std::uint32_t entry = 0;
    std::uint32_t end = 0;
    std::uint32_t arity = 0;
    std::uint32_t n_locals = 0;

    bool operator==(const FunctionInfo&) const = default;
};

// Compiled program: flat opcode list with functions first and the top-level
// statements in [top_entry, top_end). An empty script compiles to an empty
// opcode list.
struct Program {
    std::vector<Opcode> code;
    std::vector<Value> pool;
    std::vector<std::string> strings;
    std::vector<FunctionInfo> functions;
    std::vector<std::string> global_names;
    std::uint32_t top_entry = 0;
    std::uint32_t top_end = 0;
    std::uint32_t top_locals = 0;  // block-scoped lets nested inside top-level braces

    bool operator==(const Program&) const = default;

    std::optional<std::uint32_t> function_index(std::string_view name) const;
    bool has_top_level() const { return top_end > top_entry; }
    std::string disassemble() const;
};

}  // namespace detloop
