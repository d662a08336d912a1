#ifndef CALICO_PLAN_HPP
#define CALICO_PLAN_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "calico/analysis.hpp"
#include "calico/model.hpp"

namespace calico {

enum class ActionType { Notify, Log, Reconfigure };

/// What to do when a residual check fails at runtime: raise it in the
/// session report, append to a log file, or run a named reconfiguration
/// script (a target model kept in the workspace).
struct Action {
    ActionType type = ActionType::Notify;
    std::string target;  // log file path, or reconfiguration script name

    friend bool operator==(const Action&, const Action&) = default;
};

/// An interception point on one connector. Checks share the probe, so a
/// plan holds at most one probe per connector.
struct Probe {
    std::string id;
    std::string connector;
    std::set<Variable> captures;

    friend bool operator==(const Probe&, const Probe&) = default;
};

struct ResidualCheck {
    std::string id;
    std::string probe;
    ResidualPredicate predicate;
    Action action;

    friend bool operator==(const ResidualCheck&, const ResidualCheck&) = default;
};

struct DebugPlan {
    std::vector<Probe> probes;
    std::vector<ResidualCheck> checks;

    const Probe* find_probe(const std::string& id) const;
    std::string to_json() const;
    static DebugPlan from_json(const std::string& text);

    friend bool operator==(const DebugPlan&, const DebugPlan&) = default;
};

/// Where a probe is woven: message delivery at the connector's target port.
struct InterceptionPoint {
    Probe probe;
    Endpoint at;

    friend bool operator==(const InterceptionPoint&, const InterceptionPoint&) = default;
};

struct DeploymentConfig {
    std::vector<InterceptionPoint> points;  // ordered by connector id

    friend bool operator==(const DeploymentConfig&, const DeploymentConfig&) = default;
};

/// Turns the partially compatible verdicts of a gate-passing report into a
/// debug plan: one probe per connector with residuals, one check per
/// residual predicate. Checks take `defaults` unless overridden by check id.
/// Throws std::invalid_argument when the report carries an Incompatible
/// verdict.
DebugPlan plan(const AnalysisReport& report, const Action& defaults,
               const std::map<std::string, Action>& overrides = {});

/// Maps each probe to its interception point. The architecture itself is
/// never modified; probes are an overlay on the deployment. Throws
/// std::invalid_argument when a probe names an unknown connector.
DeploymentConfig weave(const DebugPlan& plan, const Architecture& arch);

std::string to_json_string(const Action& action);
Action action_from_json_string(const std::string& text);

}  // namespace calico

#endif  // CALICO_PLAN_HPP
