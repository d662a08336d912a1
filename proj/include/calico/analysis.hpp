#ifndef CALICO_ANALYSIS_HPP
#define CALICO_ANALYSIS_HPP

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "calico/model.hpp"

namespace calico {

/// A sub-analysis failed to run (state-space cap, cyclic QoS graph, protocol
/// referencing an unbound port). Distinct from an Incompatible verdict: the
/// analysis has no answer rather than a negative one.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AnalysisKind { Structural, Behavioral, Dataflow, Qos };
enum class VerdictKind { Compatible, Incompatible, PartiallyCompatible };
enum class Variable { Size, Type, Latency };

std::string to_string(AnalysisKind k);
std::string to_string(VerdictKind k);
std::string to_string(Variable v);

/// The runtime-evaluable predicate left over after a partially compatible
/// interaction: Size/Latency carry a LessOrEqual bound, Type a MemberOf set.
struct ResidualPredicate {
    std::string connector;
    Variable variable = Variable::Size;
    Bytes bound = 0;                  // bytes (Size) or milliseconds (Latency)
    std::set<std::string> allowed;    // type tokens (Type)

    std::string describe() const;

    friend bool operator==(const ResidualPredicate&, const ResidualPredicate&) = default;
};

struct Verdict {
    AnalysisKind analysis = AnalysisKind::Structural;
    std::string subject;  // connector id or rule id
    VerdictKind kind = VerdictKind::Compatible;
    std::string reason;                         // Incompatible only
    std::vector<ResidualPredicate> residuals;   // PartiallyCompatible only

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Labeled transition system compiled from a protocol term. Actions are
/// relabeled from ports to the connectors bound to them.
struct Lts {
    struct Transition {
        int from = 0;
        std::string connector;
        ActionKind kind = ActionKind::Send;
        int to = 0;

        friend bool operator==(const Transition&, const Transition&) = default;
    };

    int state_count = 0;
    int initial = 0;
    std::set<int> finals;
    std::vector<Transition> transitions;

    /// True iff the LTS accepts the given word of (connector, kind) labels.
    bool accepts(const std::vector<std::pair<std::string, ActionKind>>& word) const;
};

struct AnalysisOptions {
    std::size_t state_space_cap = 1000000;  // product states explored before erroring
};

struct AnalysisReport {
    std::vector<Verdict> verdicts;  // grouped by analysis kind, sorted by subject
    bool gate_passed = true;

    std::string to_json() const;
};

/// Access restrictions, must-be-bound rules and connector type agreement.
std::vector<Verdict> check_structural(const Architecture& arch);

/// Compiles a protocol term to an LTS whose labels are connector ids.
/// Throws AnalysisError when an action's port is unbound or has a direction
/// that cannot carry the action.
Lts compile_protocol(const TermPtr& term, const Component& component, const Architecture& arch);

/// Explores the synchronized product of all contracted components' LTSs
/// (matching send/receive on one connector step together; components without
/// contracts impose nothing). Incompatible iff a reachable state has no
/// outgoing step while some component is not final.
Verdict check_behavioral(const Architecture& arch, const AnalysisOptions& options = {});

/// Worklist propagation of produced facts along connectors; components
/// without declarations forward the join of their inputs. One verdict per
/// connector whose target port carries constraints.
std::vector<Verdict> check_dataflow(const Architecture& arch);

/// Path-sum latency prediction: sequential hops add, converging paths take
/// the max. One verdict per port with a required_max_latency.
std::vector<Verdict> check_qos(const Architecture& arch);

/// Runs all four checks over a well-formed architecture. The gate passes
/// iff no verdict is Incompatible.
AnalysisReport analyze(const Architecture& arch, const AnalysisOptions& options = {});

nlohmann::json residual_to_json(const ResidualPredicate& r);
ResidualPredicate residual_from_json(const nlohmann::json& j);

}  // namespace calico

#endif  // CALICO_ANALYSIS_HPP
