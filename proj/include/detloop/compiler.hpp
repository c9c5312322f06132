#pragma once

#include "detloop/ast.hpp"
#include "detloop/program.hpp"

#include <string_view>

namespace detloop {

// Lowers an AST to bytecode. Compilation is deterministic: the same source
// always produces a bit-identical Program (constant pools are filled in
// first-occurrence order, never by hash iteration).
//
// Scoping rules:
//   - Function names live in their own namespace, must be unique, and must
//     not collide with builtin names.
//   - Direct top-level `let` declarations become globals. Top-level code can
//     only read a global after its declaration has executed; function bodies
//     can reference any global.
//   - `let` inside braces declares a block-scoped local. Shadowing an outer
//     binding is allowed; redeclaring within the same block is an error.
Program compile(const Ast& ast);

// Convenience: tokenize + parse + compile.
Program compile_source(std::string_view source);

}  // namespace detloop
