#ifndef CALICO_RUNTIME_HPP
#define CALICO_RUNTIME_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "calico/analysis.hpp"
#include "calico/model.hpp"
#include "calico/plan.hpp"
#include "calico/reconfig.hpp"

namespace calico {

class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Tick = std::uint64_t;
using AttrValue = std::variant<std::int64_t, std::string>;
using AttrMap = std::map<std::string, AttrValue>;

std::string attr_to_string(const AttrValue& v);

// ---------------------------------------------------------------------------
// Behavior scripts
// ---------------------------------------------------------------------------

/// Attribute expressions: integer literals, attribute references, +-*/ and
/// min/max. An identifier that is not an incoming attribute evaluates to
/// itself as a token, which is how type constants are written.
struct AttrExpr;
using AttrExprPtr = std::shared_ptr<const AttrExpr>;

struct AttrExpr {
    enum class Kind { Literal, Ref, Binary, MinMax };

    Kind kind = Kind::Literal;
    AttrValue literal;
    std::string ref;
    char op = '+';        // Binary
    bool is_min = true;   // MinMax
    AttrExprPtr lhs, rhs;

    static AttrExprPtr make_literal(AttrValue v);
    static AttrExprPtr make_ref(std::string name);
    static AttrExprPtr make_binary(char op, AttrExprPtr a, AttrExprPtr b);
    static AttrExprPtr make_min_max(bool is_min, AttrExprPtr a, AttrExprPtr b);
};

AttrValue eval_attr_expr(const AttrExpr& expr, const AttrMap& incoming);

struct GuardComparison {
    AttrExprPtr lhs;
    std::string op;  // == != < <= > >=
    AttrExprPtr rhs;
};

struct Guard {
    std::vector<GuardComparison> conjuncts;  // all must hold
};

bool eval_guard(const Guard& guard, const AttrMap& incoming);

struct EmitSpec {
    std::string port;  // out port of the owning component
    std::vector<std::pair<std::string, AttrExprPtr>> attrs;
};

struct ScriptRule {
    std::string on_port;  // in port that triggers the rule
    std::optional<Guard> guard;
    std::vector<EmitSpec> emits;  // may be empty: the message is consumed
};

struct SourceSpec {
    std::string port;  // out port fired only by scenario stimuli
    std::vector<std::pair<std::string, AttrExprPtr>> attrs;
};

struct BehaviorScript {
    std::string component;
    std::vector<ScriptRule> rules;
    std::vector<SourceSpec> sources;
};

// ---------------------------------------------------------------------------
// Scenarios, messages, traces
// ---------------------------------------------------------------------------

struct Stimulus {
    Tick tick = 0;
    Endpoint at;   // a source (out) port or an in port
    AttrMap attrs;
};

struct Scenario {
    std::string name;
    std::vector<Stimulus> stimuli;  // ticks non-decreasing
};

struct Message {
    std::string connector;
    AttrMap attrs;    // always carries "size" and "type"
    Tick sent_at = 0;
    Tick origin = 0;  // tick of the stimulus this message descends from
};

struct Delivery {
    Message message;
    Endpoint at;
    Tick tick = 0;
};

/// A probe capture surfaced to the debugger. Captured keys equal the
/// probe's declared capture set.
struct ReifiedEvent {
    std::string probe;
    std::string connector;
    AttrMap captured;  // keys: "Size", "Type", "Latency"
    Tick tick = 0;
};

struct TraceEntry {
    std::variant<Delivery, ReifiedEvent> value;

    bool is_event() const { return std::holds_alternative<ReifiedEvent>(value); }
    std::string to_json_line() const;
};

struct Trace {
    std::vector<TraceEntry> entries;

    std::size_t delivery_count() const;
    std::size_t event_count() const;
    std::string to_jsonl() const;  // one message or event per line
};

// ---------------------------------------------------------------------------
// The running system
// ---------------------------------------------------------------------------

enum class RunStatus { Running, Quiesced };

struct InstanceState {
    std::uint64_t received = 0;
    std::uint64_t emitted = 0;

    friend bool operator==(const InstanceState&, const InstanceState&) = default;
};

/// The runtime view: component instances, bindings and woven probes driven
/// by a single-threaded deterministic dispatcher. Events reach observers
/// synchronously, in trace order.
class RunningSystem {
public:
    using EventObserver = std::function<void(const ReifiedEvent&)>;

    RunningSystem() = default;

    const std::string& name() const { return name_; }
    RunStatus status() const { return status_; }
    Tick clock() const { return clock_; }
    std::uint64_t seed() const { return seed_; }
    const std::map<std::string, Component>& components() const { return components_; }
    const std::map<std::string, Connector>& bindings() const { return bindings_; }
    const std::map<std::string, Probe>& probes() const { return probes_; }
    const std::map<std::string, InstanceState>& instances() const { return instances_; }
    const std::vector<std::string>& construction_log() const { return construction_log_; }
    std::size_t in_flight() const;

    /// The architecture the runtime view currently mirrors (structure only;
    /// contracts live in the model).
    Architecture structural_view() const;

    void set_event_observer(EventObserver observer) { observer_ = std::move(observer); }
    void set_scripts(std::map<std::string, BehaviorScript> scripts);
    void set_name(std::string name) { name_ = std::move(name); }

    /// Enqueues one stimulus at its tick (the clock never moves backwards).
    /// Messages stay in flight until drained.
    void inject(const Stimulus& stimulus, Trace& trace);

    /// Delivers queued messages until none remain, FIFO per connector,
    /// connectors in id order, direct in-port injections first.
    void drain(Trace& trace);

    /// Runs a scenario tick by tick on a Running system and returns its trace.
    Trace run_scenario(const Scenario& scenario);

    /// Drains all in-flight messages to delivery, then halts dispatch.
    void quiesce(Trace& trace);

    /// Restarts dispatch after a quiesce.
    void resume();

    /// Applies reconfiguration ops in order on a quiesced system. Rolls the
    /// runtime view back entirely if any op fails. Unaffected instances keep
    /// their state.
    void apply_ops(const std::vector<ReconfigOp>& ops);

    /// Rebuilds a system from persisted state without re-running analysis.
    static RunningSystem rehydrate(const Architecture& arch, const std::vector<Probe>& probes,
                                   std::map<std::string, BehaviorScript> scripts,
                                   std::uint64_t seed, Tick clock, RunStatus status,
                                   std::map<std::string, InstanceState> instances,
                                   std::vector<std::string> construction_log);

    friend RunningSystem instantiate(const Architecture& arch, const DeploymentConfig& config,
                                     std::map<std::string, BehaviorScript> scripts,
                                     std::uint64_t seed, const AnalysisOptions& options);

private:
    void apply_one(const ReconfigOp& op);
    void deliver(const Message& message, const Endpoint& target, Trace& trace);
    void emit_from(const Endpoint& source, const AttrMap& attrs, Tick origin);
    const Component& component_or_throw(const std::string& name) const;

    std::string name_;
    RunStatus status_ = RunStatus::Quiesced;
    Tick clock_ = 0;
    std::uint64_t seed_ = 0;
    std::map<std::string, Component> components_;
    std::map<std::string, Connector> bindings_;
    std::map<std::string, Probe> probes_;
    std::map<std::string, InstanceState> instances_;
    std::map<std::string, BehaviorScript> scripts_;
    std::vector<std::string> construction_log_;
    std::map<std::string, std::deque<Message>> queues_;      // per-connector FIFO
    std::deque<std::pair<Endpoint, Message>> direct_;        // in-port stimuli
    EventObserver observer_;
};

/// Verifies the gate, then builds the system by applying the construction
/// sequence: one component per name order, one connector per id order, one
/// probe per interception point. Throws RuntimeError when the gate fails or
/// a component with in ports lacks a script.
RunningSystem instantiate(const Architecture& arch, const DeploymentConfig& config,
                          std::map<std::string, BehaviorScript> scripts, std::uint64_t seed,
                          const AnalysisOptions& options = {});

/// Every component with an in port must have a script, and script rules may
/// only name ports that exist with the right direction. Throws RuntimeError.
void validate_scripts(const Architecture& arch,
                      const std::map<std::string, BehaviorScript>& scripts);

/// True iff the runtime view's component and binding sets equal the model's.
bool mirrors(const RunningSystem& sys, const Architecture& arch);

}  // namespace calico

#endif  // CALICO_RUNTIME_HPP
