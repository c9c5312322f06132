#include "detloop/token.hpp"

#include <array>
#include <cctype>

namespace detloop {

namespace {

const std::array<const char*, 9> kKeywords = {
    "let", "function", "if", "else", "while", "do", "return", "true", "false",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_cont(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Scanner {
    const std::string& src;
    std::size_t i = 0;
    int line = 1;
    int col = 1;

    bool done() const { return i >= src.size(); }
    char peek(std::size_t ahead = 0) const {
        return i + ahead < src.size() ? src[i + ahead] : '\0';
    }
    char advance() {
        char c = src[i++];
        if (c == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
        return c;
    }
};

}  // namespace

bool is_keyword(const std::string& word) {
    for (const char* k : kKeywords) {
        if (word == k) return true;
    }
    return false;
}

std::vector<Token> tokenize(const std::string& source) {
    Scanner s{source};
    std::vector<Token> out;

    for (;;) {
        // Skip whitespace and // comments.
        while (!s.done()) {
            char c = s.peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                s.advance();
            } else if (c == '/' && s.peek(1) == '/') {
                while (!s.done() && s.peek() != '\n') s.advance();
            } else {
                break;
            }
        }
        if (s.done()) break;

        SourcePos pos{s.line, s.col};
        char c = s.peek();

        if (ident_start(c)) {
            std::string word;
            while (!s.done() && ident_cont(s.peek())) word += s.advance();
            out.push_back({is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier,
                           word, 0, pos});
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (!s.done() && std::isdigit(static_cast<unsigned char>(s.peek())))
                digits += s.advance();
            // Accumulate with an overflow check; literals must fit a signed 64-bit int.
            std::uint64_t acc = 0;
            for (char d : digits) {
                std::uint64_t digit = static_cast<std::uint64_t>(d - '0');
                if (acc > (static_cast<std::uint64_t>(INT64_MAX) - digit) / 10) {
                    throw LexError(pos, "integer literal out of range: " + digits);
                }
                acc = acc * 10 + digit;
            }
            out.push_back({TokenKind::Integer, digits, static_cast<std::int64_t>(acc), pos});
            continue;
        }

        if (c == '"') {
            std::string text;
            text += s.advance();
            for (;;) {
                if (s.done() || s.peek() == '\n') {
                    throw LexError(pos, "unterminated string literal");
                }
                char d = s.advance();
                text += d;
                if (d == '"') break;
            }
            out.push_back({TokenKind::String, text, 0, pos});
            continue;
        }

        auto two = [&](char a, char b) { return c == a && s.peek(1) == b; };
        if (two('=', '=') || two('!', '=') || two('<', '=') || two('>', '=') ||
            two('&', '&') || two('|', '|')) {
            std::string text;
            text += s.advance();
            text += s.advance();
            out.push_back({TokenKind::Operator, text, 0, pos});
            continue;
        }

        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '%' || c == '<' ||
            c == '>' || c == '=' || c == '!') {
            out.push_back({TokenKind::Operator, std::string(1, s.advance()), 0, pos});
            continue;
        }

        if (c == '(' || c == ')' || c == '{' || c == '}' || c == ',' || c == ';') {
            out.push_back({TokenKind::Punct, std::string(1, s.advance()), 0, pos});
            continue;
        }

        throw LexError(pos, std::string("illegal character '") + c + "'");
    }

    out.push_back({TokenKind::End, "", 0, {s.line, s.col}});
    return out;
}

}  // namespace detloop
