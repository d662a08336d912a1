#include "lexer.hpp"

#include <cctype>

namespace calico::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

bool tokenize(const std::string& text, std::vector<Token>& out, LexError& error) {
    out.clear();
    int line = 1;
    int column = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto advance = [&](std::size_t count) {
        for (std::size_t j = 0; j < count && i < n; ++j, ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
    };

    while (i < n) {
        const char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < n && text[i + 1] == '/') {
            while (i < n && text[i] != '\n') advance(1);
            continue;
        }

        Token tok;
        tok.line = line;
        tok.column = column;

        if (ident_start(c)) {
            std::size_t j = i;
            while (j < n && ident_char(text[j])) ++j;
            tok.type = Token::Type::Ident;
            tok.text = text.substr(i, j - i);
            advance(j - i);
            out.push_back(std::move(tok));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            std::uint64_t value = 0;
            while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
                const std::uint64_t digit = static_cast<std::uint64_t>(text[j] - '0');
                if (value > (UINT64_MAX - digit) / 10) {
                    error = {line, column, "number literal out of range"};
                    return false;
                }
                value = value * 10 + digit;
                ++j;
            }
            tok.type = Token::Type::Number;
            tok.number = value;
            tok.text = text.substr(i, j - i);
            advance(j - i);
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            std::string value;
            while (j < n && text[j] != '"' && text[j] != '\n') {
                value += text[j];
                ++j;
            }
            if (j >= n || text[j] != '"') {
                error = {line, column, "unterminated string literal"};
                return false;
            }
            tok.type = Token::Type::String;
            tok.text = std::move(value);
            advance(j + 1 - i);
            out.push_back(std::move(tok));
            continue;
        }

        auto two = [&](const char* s) { return i + 1 < n && text[i] == s[0] && text[i + 1] == s[1]; };
        if (two("->") || two("==") || two("!=") || two("<=") || two(">=")) {
            tok.type = Token::Type::Punct;
            tok.text = text.substr(i, 2);
            advance(2);
            out.push_back(std::move(tok));
            continue;
        }
        static const std::string singles = "{}[]():;,.!?*|=<>+-/";
        if (singles.find(c) != std::string::npos) {
            tok.type = Token::Type::Punct;
            tok.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(tok));
            continue;
        }

        error = {line, column, std::string("unexpected character '") + c + "'"};
        return false;
    }

    Token end;
    end.type = Token::Type::End;
    end_position(text, end.line, end.column);
    out.push_back(end);
    return true;
}

void end_position(const std::string& text, int& line, int& column) {
    line = 1;
    column = 1;
    for (char c : text) {
        if (c == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    // A trailing newline would place us on an empty line past the text;
    // report the last line that actually has content instead.
    if (column == 1 && line > 1) {
        --line;
        std::size_t last = text.find_last_of('\n');
        std::size_t prev = last == 0 ? std::string::npos : text.find_last_of('\n', last - 1);
        std::size_t start = prev == std::string::npos ? 0 : prev + 1;
        column = static_cast<int>(last - start) + 1;
    }
}

}  // namespace calico::detail
