#pragma once

#include "detloop/ast.hpp"
#include "detloop/token.hpp"

namespace detloop {

// Recursive-descent parser over the token stream. Grammar summary:
//
//   program   := (function | statement)*
//   function  := 'function' IDENT '(' [IDENT (',' IDENT)*] ')' block
//   statement := 'let' IDENT '=' expr ';'
//              | IDENT '=' expr ';'
//              | 'if' '(' expr ')' statement ['else' statement]
//              | 'while' '(' expr ')' statement
//              | 'do' statement 'while' '(' expr ')' ';'
//              | 'return' [expr] ';'
//              | block
//              | expr ';'
//   block     := '{' statement* '}'
//
// Expression precedence, loosest to tightest: || , && , comparisons
// (== != < <= > >=), + -, * / %, unary (- !), primary.
Ast parse(const std::vector<Token>& tokens);

Ast parse_source(const std::string& source);  // tokenize + parse

}  // namespace detloop
