#ifndef CALICO_SRC_LEXER_HPP
#define CALICO_SRC_LEXER_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace calico::detail {

struct Token {
    enum class Type { Ident, Number, String, Punct, End };

    Type type = Type::End;
    std::string text;       // identifier text, punctuation, or string contents
    std::uint64_t number = 0;
    int line = 1;
    int column = 1;

    bool is_ident(const std::string& s) const { return type == Type::Ident && text == s; }
    bool is_punct(const std::string& s) const { return type == Type::Punct && text == s; }
};

struct LexError {
    int line;
    int column;
    std::string message;
};

/// Tokenizes source text shared by the ADL, script and scenario grammars.
/// Punctuation covers: { } [ ] ( ) : ; , . ! ? * | = < > and the multi-char
/// tokens -> == != <= >=. Comments run from "//" to end of line.
/// On failure returns false and fills `error`.
bool tokenize(const std::string& text, std::vector<Token>& out, LexError& error);

/// Line/column one past the final character, clamped to the last line.
/// Used to position errors reported at end of input.
void end_position(const std::string& text, int& line, int& column);

}  // namespace calico::detail

#endif  // CALICO_SRC_LEXER_HPP
