#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "detloop/errors.hpp"

namespace detloop {

enum class BinaryKind : std::uint8_t {
    Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or,
};

enum class UnaryKind : std::uint8_t { Neg, Not };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct IntLit { std::int64_t value = 0; };
struct StrLit { std::string value; };       // unquoted contents
struct BoolLit { bool value = false; };
struct VarRef { std::string name; };
struct UnaryExpr { UnaryKind op; ExprPtr operand; };
struct BinaryExpr { BinaryKind op; ExprPtr lhs; ExprPtr rhs; };
struct CallExpr { std::string callee; std::vector<ExprPtr> args; };

struct Expr {
    SourcePos pos;
    std::variant<IntLit, StrLit, BoolLit, VarRef, UnaryExpr, BinaryExpr, CallExpr> node;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct LetStmt { std::string name; ExprPtr init; };
struct AssignStmt { std::string name; ExprPtr value; };
struct IfStmt { ExprPtr cond; StmtPtr then_branch; StmtPtr else_branch; };  // else may be null
struct WhileStmt { ExprPtr cond; StmtPtr body; };
struct DoWhileStmt { StmtPtr body; ExprPtr cond; };
struct ReturnStmt { ExprPtr value; };  // value may be null
struct ExprStmt { ExprPtr expr; };
struct BlockStmt { std::vector<StmtPtr> body; };

struct Stmt {
    SourcePos pos;
    std::variant<LetStmt, AssignStmt, IfStmt, WhileStmt, DoWhileStmt, ReturnStmt,
                 ExprStmt, BlockStmt> node;
};

struct FunctionDef {
    SourcePos pos;
    std::string name;
    std::vector<std::string> params;
    std::vector<StmtPtr> body;
};

// Top-level items keep their source order; statements interleaved with
// function definitions form the top-level task.
struct TopItem {
    std::variant<FunctionDef, StmtPtr> item;
};

struct Ast {
    std::vector<TopItem> items;
};

}  // namespace detloop
