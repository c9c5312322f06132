#include "detloop/parser.hpp"

namespace detloop {

namespace {

struct Parser {
    const std::vector<Token>& toks;
    std::size_t i = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t j = i + ahead;
        return j < toks.size() ? toks[j] : toks.back();
    }
    const Token& advance() { return toks[i < toks.size() - 1 ? i++ : i]; }

    bool at(TokenKind k, const char* text = nullptr) const {
        const Token& t = peek();
        return t.kind == k && (text == nullptr || t.text == text);
    }
    bool accept(TokenKind k, const char* text) {
        if (at(k, text)) {
            advance();
            return true;
        }
        return false;
    }
    const Token& expect(TokenKind k, const char* text, const char* what) {
        if (!at(k, text)) {
            throw ParseError(peek().pos, std::string("expected ") + what + ", found '" +
                                             (peek().kind == TokenKind::End ? "<end>" : peek().text) +
                                             "'");
        }
        return advance();
    }

    Ast program() {
        Ast ast;
        while (!at(TokenKind::End)) {
            if (at(TokenKind::Keyword, "function")) {
                ast.items.push_back(TopItem{function()});
            } else {
                ast.items.push_back(TopItem{statement()});
            }
        }
        return ast;
    }

    FunctionDef function() {
        FunctionDef fn;
        fn.pos = peek().pos;
        expect(TokenKind::Keyword, "function", "'function'");
        fn.name = expect(TokenKind::Identifier, nullptr, "function name").text;
        expect(TokenKind::Punct, "(", "'('");
        if (!at(TokenKind::Punct, ")")) {
            for (;;) {
                fn.params.push_back(expect(TokenKind::Identifier, nullptr, "parameter name").text);
                if (!accept(TokenKind::Punct, ",")) break;
            }
        }
        expect(TokenKind::Punct, ")", "')'");
        expect(TokenKind::Punct, "{", "'{'");
        while (!at(TokenKind::Punct, "}")) {
            if (at(TokenKind::End)) throw ParseError(peek().pos, "expected '}', found '<end>'");
            fn.body.push_back(statement());
        }
        expect(TokenKind::Punct, "}", "'}'");
        return fn;
    }

    StmtPtr statement() {
        SourcePos pos = peek().pos;

        if (at(TokenKind::Keyword, "let")) {
            advance();
            LetStmt st;
            st.name = expect(TokenKind::Identifier, nullptr, "variable name").text;
            expect(TokenKind::Operator, "=", "'='");
            st.init = expression();
            expect(TokenKind::Punct, ";", "';'");
            return make(pos, std::move(st));
        }

        if (at(TokenKind::Keyword, "if")) {
            advance();
            IfStmt st;
            expect(TokenKind::Punct, "(", "'('");
            st.cond = expression();
            expect(TokenKind::Punct, ")", "')'");
            st.then_branch = statement();
            if (accept(TokenKind::Keyword, "else")) st.else_branch = statement();
            return make(pos, std::move(st));
        }

        if (at(TokenKind::Keyword, "while")) {
            advance();
            WhileStmt st;
            expect(TokenKind::Punct, "(", "'('");
            st.cond = expression();
            expect(TokenKind::Punct, ")", "')'");
            st.body = statement();
            return make(pos, std::move(st));
        }

        if (at(TokenKind::Keyword, "do")) {
            advance();
            DoWhileStmt st;
            st.body = statement();
            expect(TokenKind::Keyword, "while", "'while'");
            expect(TokenKind::Punct, "(", "'('");
            st.cond = expression();
            expect(TokenKind::Punct, ")", "')'");
            expect(TokenKind::Punct, ";", "';'");
            return make(pos, std::move(st));
        }

        if (at(TokenKind::Keyword, "return")) {
            advance();
            ReturnStmt st;
            if (!at(TokenKind::Punct, ";")) st.value = expression();
            expect(TokenKind::Punct, ";", "';'");
            return make(pos, std::move(st));
        }

        if (at(TokenKind::Punct, "{")) {
            advance();
            BlockStmt st;
            while (!at(TokenKind::Punct, "}")) {
                if (at(TokenKind::End)) throw ParseError(peek().pos, "expected '}', found '<end>'");
                st.body.push_back(statement());
            }
            expect(TokenKind::Punct, "}", "'}'");
            return make(pos, std::move(st));
        }

        if (at(TokenKind::Keyword, "function")) {
            throw ParseError(pos, "function definitions are only allowed at top level");
        }

        // Assignment requires the lookahead IDENT '=' (single '=').
        if (at(TokenKind::Identifier) && peek(1).kind == TokenKind::Operator &&
            peek(1).text == "=") {
            AssignStmt st;
            st.name = advance().text;
            advance();  // '='
            st.value = expression();
            expect(TokenKind::Punct, ";", "';'");
            return make(pos, std::move(st));
        }

        ExprStmt st;
        st.expr = expression();
        expect(TokenKind::Punct, ";", "';'");
        return make(pos, std::move(st));
    }

    template <typename T>
    static StmtPtr make(SourcePos pos, T&& node) {
        auto s = std::make_unique<Stmt>();
        s->pos = pos;
        s->node = std::forward<T>(node);
        return s;
    }

    template <typename T>
    static ExprPtr make_expr(SourcePos pos, T&& node) {
        auto e = std::make_unique<Expr>();
        e->pos = pos;
        e->node = std::forward<T>(node);
        return e;
    }

    ExprPtr expression() { return or_expr(); }

    ExprPtr or_expr() {
        ExprPtr lhs = and_expr();
        while (at(TokenKind::Operator, "||")) {
            SourcePos pos = advance().pos;
            lhs = make_expr(pos, BinaryExpr{BinaryKind::Or, std::move(lhs), and_expr()});
        }
        return lhs;
    }

    ExprPtr and_expr() {
        ExprPtr lhs = cmp_expr();
        while (at(TokenKind::Operator, "&&")) {
            SourcePos pos = advance().pos;
            lhs = make_expr(pos, BinaryExpr{BinaryKind::And, std::move(lhs), cmp_expr()});
        }
        return lhs;
    }

    ExprPtr cmp_expr() {
        ExprPtr lhs = add_expr();
        for (;;) {
            BinaryKind op;
            if (at(TokenKind::Operator, "==")) op = BinaryKind::Eq;
            else if (at(TokenKind::Operator, "!=")) op = BinaryKind::Ne;
            else if (at(TokenKind::Operator, "<")) op = BinaryKind::Lt;
            else if (at(TokenKind::Operator, "<=")) op = BinaryKind::Le;
            else if (at(TokenKind::Operator, ">")) op = BinaryKind::Gt;
            else if (at(TokenKind::Operator, ">=")) op = BinaryKind::Ge;
            else break;
            SourcePos pos = advance().pos;
            lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), add_expr()});
        }
        return lhs;
    }

    ExprPtr add_expr() {
        ExprPtr lhs = mul_expr();
        for (;;) {
            BinaryKind op;
            if (at(TokenKind::Operator, "+")) op = BinaryKind::Add;
            else if (at(TokenKind::Operator, "-")) op = BinaryKind::Sub;
            else break;
            SourcePos pos = advance().pos;
            lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), mul_expr()});
        }
        return lhs;
    }

    ExprPtr mul_expr() {
        ExprPtr lhs = unary_expr();
        for (;;) {
            BinaryKind op;
            if (at(TokenKind::Operator, "*")) op = BinaryKind::Mul;
            else if (at(TokenKind::Operator, "/")) op = BinaryKind::Div;
            else if (at(TokenKind::Operator, "%")) op = BinaryKind::Mod;
            else break;
            SourcePos pos = advance().pos;
            lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), unary_expr()});
        }
        return lhs;
    }

    ExprPtr unary_expr() {
        if (at(TokenKind::Operator, "-")) {
            SourcePos pos = advance().pos;
            return make_expr(pos, UnaryExpr{UnaryKind::Neg, unary_expr()});
        }
        if (at(TokenKind::Operator, "!")) {
            SourcePos pos = advance().pos;
            return make_expr(pos, UnaryExpr{UnaryKind::Not, unary_expr()});
        }
        return primary();
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Integer: {
                advance();
                return make_expr(t.pos, IntLit{t.value});
            }
            case TokenKind::String: {
                advance();
                // Strip the quotes recorded by the lexer.
                return make_expr(t.pos, StrLit{t.text.substr(1, t.text.size() - 2)});
            }
            case TokenKind::Keyword: {
                if (t.text == "true" || t.text == "false") {
                    advance();
                    return make_expr(t.pos, BoolLit{t.text == "true"});
                }
                break;
            }
            case TokenKind::Identifier: {
                advance();
                if (at(TokenKind::Punct, "(")) {
                    advance();
                    CallExpr call;
                    call.callee = t.text;
                    if (!at(TokenKind::Punct, ")")) {
                        for (;;) {
                            call.args.push_back(expression());
                            if (!accept(TokenKind::Punct, ",")) break;
                        }
                    }
                    expect(TokenKind::Punct, ")", "')'");
                    return make_expr(t.pos, std::move(call));
                }
                return make_expr(t.pos, VarRef{t.text});
            }
            case TokenKind::Punct: {
                if (t.text == "(") {
                    advance();
                    ExprPtr e = expression();
                    expect(TokenKind::Punct, ")", "')'");
                    return e;
                }
                break;
            }
            default:
                break;
        }
        throw ParseError(t.pos, "expected expression, found '" +
                                    (t.kind == TokenKind::End ? "<end>" : t.text) + "'");
    }
};

}  // namespace

Ast parse(const std::vector<Token>& tokens) {
    Parser p{tokens};
    return p.program();
}

Ast parse_source(const std::string& source) { return parse(tokenize(source)); }

}  // namespace detloop
