#ifndef CALICO_MODEL_HPP
#define CALICO_MODEL_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace calico {

using Bytes = std::uint64_t;
using Millis = std::uint64_t;

enum class Direction { In, Out };
enum class ActionKind { Send, Receive };

/// A (component, port) pair naming one side of an interaction.
struct Endpoint {
    std::string component;
    std::string port;

    friend bool operator==(const Endpoint&, const Endpoint&) = default;
    friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

std::string to_string(const Endpoint& e);

struct Port {
    std::string name;
    Direction direction = Direction::In;
    std::string data_type;
    bool required = false;  // must be bound by at least one connector

    friend bool operator==(const Port&, const Port&) = default;
};

/// Protocol terms form a small process language: actions on ports,
/// sequence, choice, iteration and the empty process.
struct ProcessTerm;
using TermPtr = std::shared_ptr<const ProcessTerm>;

struct ProcessTerm {
    enum class Kind { Action, Seq, Choice, Star, Skip };

    Kind kind = Kind::Skip;
    std::string port;                        // Action
    ActionKind action = ActionKind::Send;    // Action
    TermPtr left;                            // Seq/Choice left, Star child
    TermPtr right;                           // Seq/Choice right

    static TermPtr make_action(std::string port, ActionKind kind);
    static TermPtr make_seq(TermPtr a, TermPtr b);
    static TermPtr make_choice(TermPtr a, TermPtr b);
    static TermPtr make_star(TermPtr t);
    static TermPtr make_skip();
};

/// Structural three-way comparison over term trees (TermPtr identity is
/// irrelevant, only shape and labels count).
int compare_terms(const ProcessTerm& a, const ProcessTerm& b);
bool terms_equal(const TermPtr& a, const TermPtr& b);

/// Renders a term in the concrete protocol syntax (minimal parentheses).
std::string term_to_string(const ProcessTerm& t);

struct Component {
    std::string name;
    std::vector<Port> ports;
    std::optional<std::string> script;  // behavior script file reference

    const Port* find_port(const std::string& port_name) const;

    friend bool operator==(const Component&, const Component&) = default;
};

struct Connector {
    std::string id;
    Endpoint source;  // must resolve to an out port
    Endpoint target;  // must resolve to an in port

    friend bool operator==(const Connector&, const Connector&) = default;
};

struct StructuralContract {
    Endpoint subject;
    // "only [A, B]" — the peers allowed to interact through the subject port.
    std::optional<std::set<std::string>> allowed_clients;
    bool must_be_bound = false;

    friend bool operator==(const StructuralContract&, const StructuralContract&) = default;
};

struct BehavioralContract {
    std::string component;
    TermPtr protocol;

    friend bool operator==(const BehavioralContract& a, const BehavioralContract& b) {
        return a.component == b.component && terms_equal(a.protocol, b.protocol);
    }
};

/// Facts about data a port may produce. A missing upper bound or type set
/// means Top: nothing is known about that dimension.
struct DataFacts {
    Bytes size_lo = 0;
    std::optional<Bytes> size_hi;                  // nullopt = Top
    std::optional<std::set<std::string>> types;    // nullopt = Top

    friend bool operator==(const DataFacts&, const DataFacts&) = default;
};

struct DataConstraints {
    std::optional<Bytes> max_size;
    std::optional<std::set<std::string>> allowed_types;

    friend bool operator==(const DataConstraints&, const DataConstraints&) = default;
};

struct DataflowContract {
    Endpoint port;
    std::optional<DataFacts> produced;         // only meaningful on out ports
    std::optional<DataConstraints> constraints;  // only meaningful on in ports

    friend bool operator==(const DataflowContract&, const DataflowContract&) = default;
};

struct OfferedLatency {
    std::optional<Millis> ms;  // nullopt = declared unknown

    friend bool operator==(const OfferedLatency&, const OfferedLatency&) = default;
};

struct QosContract {
    Endpoint port;
    std::optional<OfferedLatency> offered;
    std::optional<Millis> required_max_ms;

    friend bool operator==(const QosContract&, const QosContract&) = default;
};

struct Architecture {
    std::string name;
    std::vector<Component> components;
    std::vector<Connector> connectors;
    std::vector<StructuralContract> structural;
    std::vector<BehavioralContract> behavioral;
    std::vector<DataflowContract> dataflow;
    std::vector<QosContract> qos;

    const Component* find_component(const std::string& name) const;
    const Port* find_port(const Endpoint& e) const;
    const Connector* find_connector(const std::string& id) const;
    std::vector<const Connector*> connectors_targeting(const Endpoint& e) const;
    std::vector<const Connector*> connectors_from(const Endpoint& e) const;
    /// Connectors with either endpoint at e.
    std::vector<const Connector*> connectors_at(const Endpoint& e) const;
    bool port_bound(const Endpoint& e) const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct ValidationIssue {
    std::string location;
    std::string message;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct WellFormednessReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

/// Checks every model invariant: unique names, resolvable endpoints,
/// connector directions, required-port bindings and contract references.
WellFormednessReport validate(const Architecture& arch);

/// Stable ordering for diffing and serialization: components and ports by
/// name, connectors by id, contracts by subject. Idempotent. Throws
/// std::invalid_argument on ill-formed input.
Architecture canonicalize(Architecture arch);

}  // namespace calico

#endif  // CALICO_MODEL_HPP
