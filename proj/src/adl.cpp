#include "calico/adl.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lexer.hpp"

namespace calico {

using detail::Token;

std::string ParseError::to_string() const {
    std::ostringstream os;
    os << line << ":" << column << ": " << message;
    if (expected && !expected->empty()) {
        os << " (expected ";
        for (std::size_t i = 0; i < expected->size(); ++i) {
            if (i) os << ", ";
            os << (*expected)[i];
        }
        os << ")";
    }
    return os.str();
}

namespace {

const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {
        "architecture", "component", "port", "in", "out", "required", "script",
        "connector", "contract", "structural", "behavioral", "dataflow", "qos",
        "on", "only", "must_be_bound", "protocol", "skip", "produces", "size",
        "types", "unknown", "requires", "max_size", "offered_latency",
        "required_max_latency"};
    return kw;
}

struct SyntaxError {
    ParseError error;
};

[[noreturn]] void fail(const Token& at, std::string message,
                       std::vector<std::string> expected = {}) {
    ParseError e;
    e.line = at.line;
    e.column = at.column;
    e.message = std::move(message);
    if (!expected.empty()) e.expected = std::move(expected);
    throw SyntaxError{std::move(e)};
}

std::string describe(const Token& t) {
    switch (t.type) {
        case Token::Type::Ident: return "\"" + t.text + "\"";
        case Token::Type::Number: return "number " + t.text;
        case Token::Type::String: return "string literal";
        case Token::Type::Punct: return "\"" + t.text + "\"";
        case Token::Type::End: return "end of input";
    }
    return "token";
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Architecture parse_architecture() {
        expect_keyword("architecture");
        arch_.name = expect_ident("architecture name");
        expect_punct("{");
        while (!at_punct("}")) {
            const Token& t = peek();
            if (t.is_ident("component"))
                parse_component();
            else if (t.is_ident("connector"))
                parse_connector();
            else if (t.is_ident("contract"))
                parse_contract();
            else
                fail(t, "unexpected " + describe(t) + " in architecture body",
                     {"component", "connector", "contract", "}"});
        }
        expect_punct("}");
        if (peek().type != Token::Type::End)
            fail(peek(), "unexpected " + describe(peek()) + " after architecture");
        return std::move(arch_);
    }

    const std::map<std::string, std::pair<int, int>>& positions() const { return positions_; }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    Architecture arch_;
    // Maps validation-report locations to source positions so that semantic
    // errors can point at the offending declaration.
    std::map<std::string, std::pair<int, int>> positions_;

    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }
    bool at_punct(const std::string& s) const { return peek().is_punct(s); }

    void record(const std::string& location, const Token& t) {
        positions_.emplace(location, std::pair{t.line, t.column});
    }

    void expect_punct(const std::string& s) {
        if (!at_punct(s)) fail(peek(), "unexpected " + describe(peek()), {s});
        ++pos_;
    }

    bool accept_punct(const std::string& s) {
        if (at_punct(s)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_keyword(const std::string& kw) {
        if (!peek().is_ident(kw)) fail(peek(), "unexpected " + describe(peek()), {kw});
        ++pos_;
    }

    bool accept_keyword(const std::string& kw) {
        if (peek().is_ident(kw)) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string expect_ident(const std::string& what) {
        const Token& t = peek();
        if (t.type != Token::Type::Ident)
            fail(t, "unexpected " + describe(t) + ", wanted " + what, {what});
        if (keywords().count(t.text))
            fail(t, "keyword \"" + t.text + "\" cannot be used as " + what, {what});
        ++pos_;
        return t.text;
    }

    Bytes expect_size() {
        const Token& t = peek();
        if (t.type != Token::Type::Number)
            fail(t, "unexpected " + describe(t) + ", wanted a size", {"size"});
        ++pos_;
        Bytes value = t.number;
        if (peek().type == Token::Type::Ident) {
            const std::string& suffix = peek().text;
            Bytes mult = 0;
            if (suffix == "B") mult = 1;
            else if (suffix == "kB") mult = 1000;
            else if (suffix == "MB") mult = 1000 * 1000;
            else if (suffix == "GB") mult = 1000 * 1000 * 1000;
            if (mult) {
                if (mult != 0 && value > UINT64_MAX / mult)
                    fail(t, "size literal out of range");
                value *= mult;
                ++pos_;
            }
        }
        return value;
    }

    Millis expect_duration() {
        const Token& t = peek();
        if (t.type != Token::Type::Number)
            fail(t, "unexpected " + describe(t) + ", wanted a duration", {"duration"});
        ++pos_;
        if (peek().is_ident("ms")) ++pos_;
        return t.number;
    }

    Endpoint expect_endpoint() {
        Endpoint e;
        e.component = expect_ident("component name");
        expect_punct(".");
        e.port = expect_ident("port name");
        return e;
    }

    void parse_component() {
        const Token& kw = peek();
        expect_keyword("component");
        Component c;
        c.name = expect_ident("component name");
        record("component " + c.name, kw);
        expect_punct("{");
        while (peek().is_ident("port")) {
            const Token& pt = peek();
            ++pos_;
            Port p;
            if (accept_keyword("in"))
                p.direction = Direction::In;
            else if (accept_keyword("out"))
                p.direction = Direction::Out;
            else
                fail(peek(), "unexpected " + describe(peek()), {"in", "out"});
            p.name = expect_ident("port name");
            expect_punct(":");
            p.data_type = expect_ident("data type");
            p.required = accept_keyword("required");
            record("component " + c.name + " port " + p.name, pt);
            c.ports.push_back(std::move(p));
        }
        if (accept_keyword("script")) {
            const Token& t = peek();
            if (t.type != Token::Type::String)
                fail(t, "unexpected " + describe(t), {"string literal"});
            ++pos_;
            c.script = t.text;
        }
        expect_punct("}");
        arch_.components.push_back(std::move(c));
    }

    void parse_connector() {
        const Token& kw = peek();
        expect_keyword("connector");
        Connector k;
        k.id = expect_ident("connector id");
        record("connector " + k.id, kw);
        expect_punct(":");
        k.source = expect_endpoint();
        expect_punct("->");
        k.target = expect_endpoint();
        arch_.connectors.push_back(std::move(k));
    }

    void parse_contract() {
        const Token& kw = peek();
        expect_keyword("contract");
        if (accept_keyword("structural")) {
            expect_keyword("on");
            StructuralContract sc;
            sc.subject = expect_endpoint();
            record("structural contract on " + to_string(sc.subject), kw);
            expect_punct("{");
            if (accept_keyword("only")) {
                expect_punct("[");
                std::set<std::string> clients;
                clients.insert(expect_ident("component name"));
                while (accept_punct(",")) clients.insert(expect_ident("component name"));
                expect_punct("]");
                sc.allowed_clients = std::move(clients);
            }
            sc.must_be_bound = accept_keyword("must_be_bound");
            expect_punct("}");
            arch_.structural.push_back(std::move(sc));
        } else if (accept_keyword("behavioral")) {
            expect_keyword("on");
            BehavioralContract bc;
            bc.component = expect_ident("component name");
            record("behavioral contract on " + bc.component, kw);
            expect_punct("{");
            expect_keyword("protocol");
            expect_punct(":");
            bc.protocol = parse_proc_term();
            expect_punct("}");
            arch_.behavioral.push_back(std::move(bc));
        } else if (accept_keyword("dataflow")) {
            expect_keyword("on");
            DataflowContract dc;
            dc.port = expect_endpoint();
            record("dataflow contract on " + to_string(dc.port), kw);
            expect_punct("{");
            if (accept_keyword("produces")) {
                DataFacts facts;
                expect_keyword("size");
                expect_punct("[");
                facts.size_lo = expect_size();
                expect_punct(",");
                if (accept_keyword("unknown"))
                    facts.size_hi = std::nullopt;
                else
                    facts.size_hi = expect_size();
                expect_punct("]");
                expect_keyword("types");
                if (accept_keyword("unknown")) {
                    facts.types = std::nullopt;
                } else {
                    expect_punct("{");
                    std::set<std::string> types;
                    types.insert(expect_ident("type token"));
                    while (accept_punct(",")) types.insert(expect_ident("type token"));
                    expect_punct("}");
                    facts.types = std::move(types);
                }
                dc.produced = std::move(facts);
            }
            if (accept_keyword("requires")) {
                DataConstraints constraints;
                if (accept_keyword("max_size")) constraints.max_size = expect_size();
                if (accept_keyword("types")) {
                    expect_punct("{");
                    std::set<std::string> types;
                    types.insert(expect_ident("type token"));
                    while (accept_punct(",")) types.insert(expect_ident("type token"));
                    expect_punct("}");
                    constraints.allowed_types = std::move(types);
                }
                dc.constraints = std::move(constraints);
            }
            expect_punct("}");
            arch_.dataflow.push_back(std::move(dc));
        } else if (accept_keyword("qos")) {
            expect_keyword("on");
            QosContract qc;
            qc.port = expect_endpoint();
            record("qos contract on " + to_string(qc.port), kw);
            expect_punct("{");
            if (accept_keyword("offered_latency")) {
                OfferedLatency offered;
                if (accept_keyword("unknown"))
                    offered.ms = std::nullopt;
                else
                    offered.ms = expect_duration();
                qc.offered = offered;
            }
            if (accept_keyword("required_max_latency")) qc.required_max_ms = expect_duration();
            expect_punct("}");
            arch_.qos.push_back(std::move(qc));
        } else {
            fail(peek(), "unexpected " + describe(peek()),
                 {"structural", "behavioral", "dataflow", "qos"});
        }
    }

    // procTerm := choice-chains joined by ";", lowest precedence first.
    TermPtr parse_proc_term() {
        TermPtr t = parse_choice_term();
        while (accept_punct(";")) t = ProcessTerm::make_seq(t, parse_choice_term());
        return t;
    }

    TermPtr parse_choice_term() {
        TermPtr t = parse_star_term();
        while (accept_punct("|")) t = ProcessTerm::make_choice(t, parse_star_term());
        return t;
    }

    TermPtr parse_star_term() {
        TermPtr t = parse_atom_term();
        if (accept_punct("*")) t = ProcessTerm::make_star(t);
        return t;
    }

    TermPtr parse_atom_term() {
        if (accept_keyword("skip")) return ProcessTerm::make_skip();
        if (accept_punct("(")) {
            TermPtr t = parse_proc_term();
            expect_punct(")");
            return t;
        }
        std::string port = expect_ident("port action");
        if (accept_punct("!")) return ProcessTerm::make_action(port, ActionKind::Send);
        if (accept_punct("?")) return ProcessTerm::make_action(port, ActionKind::Receive);
        fail(peek(), "unexpected " + describe(peek()), {"!", "?"});
    }
};

}  // namespace

ParseResult parse(const std::string& text) {
    ParseResult result;

    std::vector<Token> tokens;
    detail::LexError lex_error;
    if (!detail::tokenize(text, tokens, lex_error)) {
        result.errors.push_back({lex_error.line, lex_error.column, lex_error.message, {}});
        return result;
    }

    Parser parser(std::move(tokens));
    Architecture arch;
    try {
        arch = parser.parse_architecture();
    } catch (const SyntaxError& e) {
        result.errors.push_back(e.error);
        return result;
    }

    WellFormednessReport report = validate(arch);
    if (!report.ok()) {
        for (const auto& issue : report.issues) {
            ParseError e;
            auto it = parser.positions().find(issue.location);
            if (it != parser.positions().end()) {
                e.line = it->second.first;
                e.column = it->second.second;
            }
            e.message = issue.location + ": " + issue.message;
            result.errors.push_back(std::move(e));
        }
        return result;
    }

    result.architecture = canonicalize(std::move(arch));
    return result;
}

std::string format_size(Bytes value) {
    if (value != 0 && value % 1000000000 == 0) return std::to_string(value / 1000000000) + "GB";
    if (value != 0 && value % 1000000 == 0) return std::to_string(value / 1000000) + "MB";
    if (value != 0 && value % 1000 == 0) return std::to_string(value / 1000) + "kB";
    return std::to_string(value);
}

namespace {

std::string format_type_set(const std::set<std::string>& types) {
    std::string out = "{";
    bool first = true;
    for (const auto& t : types) {
        if (!first) out += ", ";
        out += t;
        first = false;
    }
    out += "}";
    return out;
}

}  // namespace

std::string serialize(const Architecture& input) {
    Architecture arch = canonicalize(input);  // throws on ill-formed input

    std::ostringstream os;
    os << "architecture " << arch.name << " {\n";
    for (const auto& c : arch.components) {
        os << "  component " << c.name << " {\n";
        for (const auto& p : c.ports) {
            os << "    port " << (p.direction == Direction::In ? "in" : "out") << " " << p.name
               << " : " << p.data_type;
            if (p.required) os << " required";
            os << "\n";
        }
        if (c.script) os << "    script \"" << *c.script << "\"\n";
        os << "  }\n";
    }
    for (const auto& k : arch.connectors)
        os << "  connector " << k.id << " : " << to_string(k.source) << " -> "
           << to_string(k.target) << "\n";
    for (const auto& sc : arch.structural) {
        os << "  contract structural on " << to_string(sc.subject) << " {";
        if (sc.allowed_clients) {
            os << " only [";
            bool first = true;
            for (const auto& client : *sc.allowed_clients) {
                if (!first) os << ", ";
                os << client;
                first = false;
            }
            os << "]";
        }
        if (sc.must_be_bound) os << " must_be_bound";
        os << " }\n";
    }
    for (const auto& bc : arch.behavioral)
        os << "  contract behavioral on " << bc.component << " { protocol: "
           << term_to_string(*bc.protocol) << " }\n";
    for (const auto& dc : arch.dataflow) {
        os << "  contract dataflow on " << to_string(dc.port) << " {";
        if (dc.produced) {
            os << " produces size [" << format_size(dc.produced->size_lo) << ", "
               << (dc.produced->size_hi ? format_size(*dc.produced->size_hi) : "unknown") << "]";
            os << " types " << (dc.produced->types ? format_type_set(*dc.produced->types)
                                                   : "unknown");
        }
        if (dc.constraints) {
            os << " requires";
            if (dc.constraints->max_size) os << " max_size " << format_size(*dc.constraints->max_size);
            if (dc.constraints->allowed_types)
                os << " types " << format_type_set(*dc.constraints->allowed_types);
        }
        os << " }\n";
    }
    for (const auto& qc : arch.qos) {
        os << "  contract qos on " << to_string(qc.port) << " {";
        if (qc.offered) {
            os << " offered_latency ";
            if (qc.offered->ms)
                os << *qc.offered->ms << "ms";
            else
                os << "unknown";
        }
        if (qc.required_max_ms) os << " required_max_latency " << *qc.required_max_ms << "ms";
        os << " }\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace calico
