#include "calico/scripts.hpp"

#include <cstdint>

#include "lexer.hpp"

namespace calico {

using detail::Token;

namespace {

struct ScriptSyntaxError {
    ParseError error;
};

[[noreturn]] void fail(const Token& at, std::string message) {
    throw ScriptSyntaxError{{at.line, at.column, std::move(message), std::nullopt}};
}

class FileParser {
public:
    explicit FileParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }

    const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    bool accept_word(const std::string& word) {
        if (peek().is_ident(word)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_word(const std::string& word) {
        if (!accept_word(word))
            fail(peek(), "expected \"" + word + "\"");
    }

    void expect_punct(const std::string& p) {
        if (!peek().is_punct(p)) fail(peek(), "expected \"" + p + "\"");
        ++pos_;
    }

    bool accept_punct(const std::string& p) {
        if (peek().is_punct(p)) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string expect_name(const std::string& what) {
        if (peek().type != Token::Type::Ident) fail(peek(), "expected " + what);
        return next().text;
    }

    std::int64_t expect_number_with_suffix() {
        if (peek().type != Token::Type::Number) fail(peek(), "expected a number");
        std::uint64_t value = next().number;
        if (peek().type == Token::Type::Ident) {
            const std::string& s = peek().text;
            std::uint64_t mult = 0;
            if (s == "B" || s == "ms") mult = 1;
            else if (s == "kB") mult = 1000;
            else if (s == "MB") mult = 1000000;
            else if (s == "GB") mult = 1000000000;
            if (mult) {
                value *= mult;
                ++pos_;
            }
        }
        return static_cast<std::int64_t>(value);
    }

    // expr := mul (("+"|"-") mul)* ; mul := prim (("*"|"/") prim)*
    AttrExprPtr parse_expr() {
        AttrExprPtr e = parse_mul();
        while (peek().is_punct("+") || peek().is_punct("-")) {
            const char op = next().text[0];
            e = AttrExpr::make_binary(op, e, parse_mul());
        }
        return e;
    }

    AttrExprPtr parse_mul() {
        AttrExprPtr e = parse_primary();
        while (peek().is_punct("*") || peek().is_punct("/")) {
            const char op = next().text[0];
            e = AttrExpr::make_binary(op, e, parse_primary());
        }
        return e;
    }

    AttrExprPtr parse_primary() {
        if (peek().type == Token::Type::Number)
            return AttrExpr::make_literal(expect_number_with_suffix());
        if (peek().is_punct("(")) {
            ++pos_;
            AttrExprPtr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if ((peek().is_ident("min") || peek().is_ident("max")) && peek(1).is_punct("(")) {
            const bool is_min = next().text == "min";
            expect_punct("(");
            AttrExprPtr a = parse_expr();
            expect_punct(",");
            AttrExprPtr b = parse_expr();
            expect_punct(")");
            return AttrExpr::make_min_max(is_min, a, b);
        }
        if (peek().type == Token::Type::Ident) return AttrExpr::make_ref(next().text);
        fail(peek(), "expected an expression");
    }

    // attr assignments: ident "=" expr, as long as the lookahead matches
    std::vector<std::pair<std::string, AttrExprPtr>> parse_attr_specs() {
        std::vector<std::pair<std::string, AttrExprPtr>> specs;
        while (peek().type == Token::Type::Ident && peek(1).is_punct("=")) {
            std::string key = next().text;
            expect_punct("=");
            specs.emplace_back(std::move(key), parse_expr());
        }
        return specs;
    }

    Guard parse_guard() {
        Guard guard;
        do {
            GuardComparison cmp;
            cmp.lhs = parse_expr();
            const Token& op = peek();
            if (!op.is_punct("==") && !op.is_punct("!=") && !op.is_punct("<") &&
                !op.is_punct("<=") && !op.is_punct(">") && !op.is_punct(">="))
                fail(op, "expected a comparison operator");
            cmp.op = next().text;
            cmp.rhs = parse_expr();
            guard.conjuncts.push_back(std::move(cmp));
        } while (accept_word("and"));
        return guard;
    }

    void expect_end() {
        if (peek().type != Token::Type::End) fail(peek(), "unexpected trailing input");
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace

ParsedFile<BehaviorScript> parse_script(const std::string& text) {
    ParsedFile<BehaviorScript> result;
    std::vector<Token> tokens;
    detail::LexError lex_error;
    if (!detail::tokenize(text, tokens, lex_error)) {
        result.errors.push_back({lex_error.line, lex_error.column, lex_error.message, {}});
        return result;
    }

    FileParser p(std::move(tokens));
    BehaviorScript script;
    try {
        p.expect_word("script");
        script.component = p.expect_name("component name");
        p.expect_punct("{");
        while (!p.accept_punct("}")) {
            if (p.accept_word("on")) {
                ScriptRule rule;
                rule.on_port = p.expect_name("port name");
                if (p.accept_word("when")) rule.guard = p.parse_guard();
                while (p.accept_word("emit")) {
                    EmitSpec emit;
                    emit.port = p.expect_name("port name");
                    emit.attrs = p.parse_attr_specs();
                    rule.emits.push_back(std::move(emit));
                }
                script.rules.push_back(std::move(rule));
            } else if (p.accept_word("source")) {
                SourceSpec source;
                source.port = p.expect_name("port name");
                source.attrs = p.parse_attr_specs();
                script.sources.push_back(std::move(source));
            } else {
                fail(p.peek(), "expected \"on\", \"source\" or \"}\"");
            }
        }
        p.expect_end();
    } catch (const ScriptSyntaxError& e) {
        result.errors.push_back(e.error);
        return result;
    }
    result.value = std::move(script);
    return result;
}

ParsedFile<Scenario> parse_scenario(const std::string& text) {
    ParsedFile<Scenario> result;
    std::vector<Token> tokens;
    detail::LexError lex_error;
    if (!detail::tokenize(text, tokens, lex_error)) {
        result.errors.push_back({lex_error.line, lex_error.column, lex_error.message, {}});
        return result;
    }

    FileParser p(std::move(tokens));
    Scenario scenario;
    try {
        p.expect_word("scenario");
        scenario.name = p.expect_name("scenario name");
        p.expect_punct("{");
        Tick previous = 0;
        while (!p.accept_punct("}")) {
            const Token& at = p.peek();
            p.expect_word("at");
            Stimulus stimulus;
            if (p.peek().type != Token::Type::Number) fail(p.peek(), "expected a tick number");
            stimulus.tick = p.next().number;
            if (stimulus.tick < previous)
                fail(at, "stimulus ticks must be non-decreasing");
            previous = stimulus.tick;
            p.expect_word("stim");
            stimulus.at.component = p.expect_name("component name");
            p.expect_punct(".");
            stimulus.at.port = p.expect_name("port name");
            while (p.peek().type == Token::Type::Ident && p.peek(1).is_punct("=")) {
                std::string key = p.next().text;
                p.expect_punct("=");
                if (p.peek().type == Token::Type::Number)
                    stimulus.attrs[key] = AttrValue{p.expect_number_with_suffix()};
                else if (p.peek().type == Token::Type::Ident)
                    stimulus.attrs[key] = AttrValue{p.next().text};
                else
                    fail(p.peek(), "expected a number or token value");
            }
            scenario.stimuli.push_back(std::move(stimulus));
        }
        p.expect_end();
    } catch (const ScriptSyntaxError& e) {
        result.errors.push_back(e.error);
        return result;
    }
    result.value = std::move(scenario);
    return result;
}

}  // namespace calico
