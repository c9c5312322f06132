#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detloop/errors.hpp"

namespace detloop {

enum class TokenKind : std::uint8_t {
    Identifier,
    Integer,
    String,
    Keyword,
    Punct,
    Operator,
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;       // exact source text; string tokens keep their quotes
    std::int64_t value = 0; // integer tokens only
    SourcePos pos;
};

// Splits DetScript source into tokens. The trailing End token carries the
// position one past the last character. Concatenating the non-End token texts
// equals the source with whitespace and comments removed.
std::vector<Token> tokenize(const std::string& source);

bool is_keyword(const std::string& word);

}  // namespace detloop
