#include "detloop/compiler.hpp"

#include "detloop/errors.hpp"
#include "detloop/parser.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <utility>

namespace detloop {

namespace {

class Compiler {
public:
    explicit Compiler(const Ast& ast) : ast_(ast) {}

    Program run() {
        collect_signatures();
        collect_globals();

        for (const TopItem& item : ast_.items) {
            if (const auto* fn = std::get_if<FunctionDef>(&item.item)) compile_function(*fn);
        }

        prog_.top_entry = static_cast<std::uint32_t>(prog_.code.size());
        in_function_ = false;
        ctx_ = FnCtx{};
        ctx_.scopes.emplace_back();
        for (const TopItem& item : ast_.items) {
            if (const auto* stmt = std::get_if<StmtPtr>(&item.item)) compile_stmt(**stmt);
        }
        prog_.top_end = static_cast<std::uint32_t>(prog_.code.size());
        prog_.top_locals = ctx_.max_slots;
        return std::move(prog_);
    }

private:
    struct FnCtx {
        // Innermost scope last. Each entry maps a name to its local slot.
        std::vector<std::vector<std::pair<std::string, std::uint32_t>>> scopes;
        std::uint32_t next_slot = 0;
        std::uint32_t max_slots = 0;
    };

    // ---- symbol collection ------------------------------------------------

    void collect_signatures() {
        for (const TopItem& item : ast_.items) {
            const auto* fn = std::get_if<FunctionDef>(&item.item);
            if (!fn) continue;
            if (builtin_by_name(fn->name))
                throw CompileError(fn->pos, "'" + fn->name + "' is a builtin and cannot be redefined");
            if (prog_.function_index(fn->name))
                throw CompileError(fn->pos, "duplicate function '" + fn->name + "'");
            FunctionInfo info;
            info.name = fn->name;
            info.arity = static_cast<std::uint32_t>(fn->params.size());
            prog_.functions.push_back(std::move(info));
        }
    }

    void collect_globals() {
        for (const TopItem& item : ast_.items) {
            const auto* stmt = std::get_if<StmtPtr>(&item.item);
            if (!stmt) continue;
            const auto* let = std::get_if<LetStmt>(&(*stmt)->node);
            if (!let) continue;
            auto& names = prog_.global_names;
            if (std::find(names.begin(), names.end(), let->name) != names.end())
                throw CompileError((*stmt)->pos, "duplicate global '" + let->name + "'");
            names.push_back(let->name);
        }
    }

    // ---- constant pool ----------------------------------------------------

    std::uint32_t const_unit() {
        if (!unit_idx_) {
            unit_idx_ = static_cast<std::uint32_t>(prog_.pool.size());
            prog_.pool.push_back(Value::unit());
        }
        return *unit_idx_;
    }

    std::uint32_t const_int(std::int64_t v) {
        auto it = int_idx_.find(v);
        if (it != int_idx_.end()) return it->second;
        auto idx = static_cast<std::uint32_t>(prog_.pool.size());
        prog_.pool.push_back(Value::integer(v));
        int_idx_.emplace(v, idx);
        return idx;
    }

    std::uint32_t const_str(const std::string& content) {
        auto it = str_idx_.find(content);
        std::uint32_t sidx;
        if (it != str_idx_.end()) {
            sidx = it->second;
        } else {
            sidx = static_cast<std::uint32_t>(prog_.strings.size());
            prog_.strings.push_back(content);
            str_idx_.emplace(content, sidx);
        }
        auto pit = strpool_idx_.find(sidx);
        if (pit != strpool_idx_.end()) return pit->second;
        auto idx = static_cast<std::uint32_t>(prog_.pool.size());
        prog_.pool.push_back(Value::string_ref(sidx));
        strpool_idx_.emplace(sidx, idx);
        return idx;
    }

    // ---- emission helpers -------------------------------------------------

    std::uint32_t here() const { return static_cast<std::uint32_t>(prog_.code.size()); }

    void emit(Op op, std::uint32_t a = 0, std::uint32_t b = 0) {
        prog_.code.push_back(Opcode{op, a, b});
    }

    // Emits a jump with a dummy target; returns the index to patch later.
    std::uint32_t emit_jump(Op op) {
        auto at = here();
        emit(op, 0);
        return at;
    }

    void patch(std::uint32_t jump_at, std::uint32_t target) {
        prog_.code[jump_at].a = target;
    }

    // ---- scoping ------------------------------------------------------------

    std::uint32_t declare_local(const SourcePos& pos, const std::string& name) {
        auto& scope = ctx_.scopes.back();
        for (const auto& [n, slot] : scope) {
            (void)slot;
            if (n == name) throw CompileError(pos, "duplicate declaration of '" + name + "'");
        }
        std::uint32_t slot = ctx_.next_slot++;
        ctx_.max_slots = std::max(ctx_.max_slots, ctx_.next_slot);
        scope.emplace_back(name, slot);
        return slot;
    }

    std::optional<std::uint32_t> resolve_local(const std::string& name) const {
        for (auto s = ctx_.scopes.rbegin(); s != ctx_.scopes.rend(); ++s)
            for (auto e = s->rbegin(); e != s->rend(); ++e)
                if (e->first == name) return e->second;
        return std::nullopt;
    }

    std::optional<std::uint32_t> resolve_global(const std::string& name) const {
        // Top-level code only sees globals whose `let` has already run.
        std::size_t limit = in_function_ ? prog_.global_names.size() : top_declared_;
        for (std::size_t i = 0; i < limit; ++i)
            if (prog_.global_names[i] == name) return static_cast<std::uint32_t>(i);
        return std::nullopt;
    }

    void push_scope() { ctx_.scopes.emplace_back(); }

    void pop_scope() {
        ctx_.next_slot -= static_cast<std::uint32_t>(ctx_.scopes.back().size());
        ctx_.scopes.pop_back();
    }

    // ---- functions ----------------------------------------------------------

    void compile_function(const FunctionDef& fn) {
        in_function_ = true;
        ctx_ = FnCtx{};
        ctx_.scopes.emplace_back();
        for (const auto& p : fn.params) {
            for (const auto& [n, slot] : ctx_.scopes.back()) {
                (void)slot;
                if (n == p) throw CompileError(fn.pos, "duplicate parameter '" + p + "'");
            }
            declare_local(fn.pos, p);
        }

        FunctionInfo& info = prog_.functions[*prog_.function_index(fn.name)];
        info.entry = here();
        for (const auto& stmt : fn.body) compile_stmt(*stmt);
        // Implicit `return;` so every path leaves a value.
        emit(Op::PushConst, const_unit());
        emit(Op::Return);
        info.end = here();
        info.n_locals = ctx_.max_slots;
    }

    // ---- statements -----------------------------------------------------------

    void compile_stmt(const Stmt& stmt) {
        std::visit([&](const auto& node) { compile_node(stmt.pos, node); }, stmt.node);
    }

    void compile_node(const SourcePos& pos, const LetStmt& let) {
        compile_expr(*let.init);
        bool direct_top = !in_function_ && ctx_.scopes.size() == 1;
        if (direct_top) {
            auto slot = static_cast<std::uint32_t>(top_declared_++);
            emit(Op::StoreVar, slot, 1);
        } else {
            emit(Op::StoreVar, declare_local(pos, let.name), 0);
        }
    }

    void compile_node(const SourcePos& pos, const AssignStmt& assign) {
        compile_expr(*assign.value);
        if (auto slot = resolve_local(assign.name)) {
            emit(Op::StoreVar, *slot, 0);
        } else if (auto g = resolve_global(assign.name)) {
            emit(Op::StoreVar, *g, 1);
        } else {
            throw CompileError(pos, "assignment to undeclared variable '" + assign.name + "'");
        }
    }

    void compile_node(const SourcePos&, const IfStmt& node) {
        compile_expr(*node.cond);
        auto to_else = emit_jump(Op::JumpIfFalse);
        compile_stmt(*node.then_branch);
        if (node.else_branch) {
            auto to_end = emit_jump(Op::Jump);
            patch(to_else, here());
            compile_stmt(*node.else_branch);
            patch(to_end, here());
        } else {
            patch(to_else, here());
        }
    }

    void compile_node(const SourcePos&, const WhileStmt& node) {
        auto top = here();
        compile_expr(*node.cond);
        auto to_end = emit_jump(Op::JumpIfFalse);
        compile_stmt(*node.body);
        emit(Op::Jump, top);
        patch(to_end, here());
    }

    void compile_node(const SourcePos&, const DoWhileStmt& node) {
        auto top = here();
        compile_stmt(*node.body);
        compile_expr(*node.cond);
        // Loop while the condition holds: invert, then fall out on true.
        emit(Op::UnaryOp, static_cast<std::uint32_t>(UnOp::Not));
        emit(Op::JumpIfFalse, top);
    }

    void compile_node(const SourcePos& pos, const ReturnStmt& node) {
        if (!in_function_) throw CompileError(pos, "'return' outside of a function");
        if (node.value) {
            compile_expr(*node.value);
        } else {
            emit(Op::PushConst, const_unit());
        }
        emit(Op::Return);
    }

    void compile_node(const SourcePos&, const ExprStmt& node) {
        compile_expr(*node.expr);
        emit(Op::Pop);
    }

    void compile_node(const SourcePos&, const BlockStmt& node) {
        push_scope();
        for (const auto& stmt : node.body) compile_stmt(*stmt);
        pop_scope();
    }

    // ---- expressions ------------------------------------------------------------

    void compile_expr(const Expr& expr) {
        std::visit([&](const auto& node) { compile_expr_node(expr.pos, node); }, expr.node);
    }

    void compile_expr_node(const SourcePos&, const IntLit& lit) {
        emit(Op::PushConst, const_int(lit.value));
    }

    void compile_expr_node(const SourcePos&, const StrLit& lit) {
        emit(Op::PushConst, const_str(lit.value));
    }

    void compile_expr_node(const SourcePos&, const BoolLit& lit) {
        emit(Op::PushConst, const_int(lit.value ? 1 : 0));
    }

    void compile_expr_node(const SourcePos& pos, const VarRef& var) {
        if (auto slot = resolve_local(var.name)) {
            emit(Op::LoadVar, *slot, 0);
        } else if (auto g = resolve_global(var.name)) {
            emit(Op::LoadVar, *g, 1);
        } else {
            throw CompileError(pos, "unresolved variable '" + var.name + "'");
        }
    }

    void compile_expr_node(const SourcePos&, const UnaryExpr& node) {
        compile_expr(*node.operand);
        emit(Op::UnaryOp, static_cast<std::uint32_t>(node.op == UnaryKind::Neg ? UnOp::Neg : UnOp::Not));
    }

    void compile_expr_node(const SourcePos&, const BinaryExpr& node) {
        if (node.op == BinaryKind::And) {
            // a && b: 0 if a is falsy, else the value of b.
            compile_expr(*node.lhs);
            auto to_false = emit_jump(Op::JumpIfFalse);
            compile_expr(*node.rhs);
            auto to_end = emit_jump(Op::Jump);
            patch(to_false, here());
            emit(Op::PushConst, const_int(0));
            patch(to_end, here());
            return;
        }
        if (node.op == BinaryKind::Or) {
            // a || b: 1 if a is truthy, else the value of b.
            compile_expr(*node.lhs);
            auto to_rhs = emit_jump(Op::JumpIfFalse);
            emit(Op::PushConst, const_int(1));
            auto to_end = emit_jump(Op::Jump);
            patch(to_rhs, here());
            compile_expr(*node.rhs);
            patch(to_end, here());
            return;
        }
        compile_expr(*node.lhs);
        compile_expr(*node.rhs);
        emit(Op::BinaryOp, static_cast<std::uint32_t>(to_binop(node.op)));
    }

    static BinOp to_binop(BinaryKind kind) {
        switch (kind) {
            case BinaryKind::Add: return BinOp::Add;
            case BinaryKind::Sub: return BinOp::Sub;
            case BinaryKind::Mul: return BinOp::Mul;
            case BinaryKind::Div: return BinOp::Div;
            case BinaryKind::Mod: return BinOp::Mod;
            case BinaryKind::Eq: return BinOp::Eq;
            case BinaryKind::Ne: return BinOp::Ne;
            case BinaryKind::Lt: return BinOp::Lt;
            case BinaryKind::Le: return BinOp::Le;
            case BinaryKind::Gt: return BinOp::Gt;
            case BinaryKind::Ge: return BinOp::Ge;
            case BinaryKind::And:
            case BinaryKind::Or: break;
        }
        throw std::logic_error("unreachable binary kind");
    }

    void compile_expr_node(const SourcePos& pos, const CallExpr& call) {
        if (const BuiltinSig* sig = builtin_by_name(call.callee)) {
            compile_builtin_call(pos, call, *sig);
            return;
        }
        auto fn_idx = prog_.function_index(call.callee);
        if (!fn_idx) throw CompileError(pos, "unknown function '" + call.callee + "'");
        const FunctionInfo& info = prog_.functions[*fn_idx];
        if (call.args.size() != info.arity)
            throw CompileError(pos, "function '" + call.callee + "' expects " +
                                        std::to_string(info.arity) + " argument(s), got " +
                                        std::to_string(call.args.size()));
        for (const auto& arg : call.args) compile_expr(*arg);
        emit(Op::Call, static_cast<std::uint32_t>(*fn_idx));
    }

    void compile_builtin_call(const SourcePos& pos, const CallExpr& call, const BuiltinSig& sig) {
        if (call.args.size() != sig.arity)
            throw CompileError(pos, std::string("builtin '") + sig.name + "' expects " +
                                        std::to_string(sig.arity) + " argument(s), got " +
                                        std::to_string(call.args.size()));
        for (std::size_t i = 0; i < call.args.size(); ++i) {
            const Expr& arg = *call.args[i];
            if (sig.fn_arg_mask & (1u << i)) {
                // Callback positions take a bare function name, checked here.
                const auto* ref = std::get_if<VarRef>(&arg.node);
                if (!ref)
                    throw CompileError(arg.pos, std::string("builtin '") + sig.name +
                                                    "' expects a function name as argument " +
                                                    std::to_string(i + 1));
                auto fn_idx = prog_.function_index(ref->name);
                if (!fn_idx)
                    throw CompileError(arg.pos, "unknown function '" + ref->name + "'");
                const FunctionInfo& info = prog_.functions[*fn_idx];
                if (info.arity != sig.fn_arg_arity)
                    throw CompileError(arg.pos, "function '" + ref->name + "' passed to '" +
                                                    sig.name + "' must take " +
                                                    std::to_string(sig.fn_arg_arity) +
                                                    " parameter(s), takes " +
                                                    std::to_string(info.arity));
                emit(Op::PushConst, const_int(static_cast<std::int64_t>(*fn_idx)));
            } else {
                compile_expr(arg);
            }
        }
        emit(Op::CallBuiltin, static_cast<std::uint32_t>(sig.builtin),
             static_cast<std::uint32_t>(call.args.size()));
    }

    const Ast& ast_;
    Program prog_;
    FnCtx ctx_;
    bool in_function_ = false;
    std::size_t top_declared_ = 0;

    std::optional<std::uint32_t> unit_idx_;
    std::map<std::int64_t, std::uint32_t> int_idx_;
    std::map<std::string, std::uint32_t> str_idx_;
    std::map<std::uint32_t, std::uint32_t> strpool_idx_;
};

}  // namespace

Program compile(const Ast& ast) { return Compiler(ast).run(); }

Program compile_source(std::string_view source) {
    return compile(parse_source(std::string(source)));
}

}  // namespace detloop
