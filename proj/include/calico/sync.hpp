#ifndef CALICO_SYNC_HPP
#define CALICO_SYNC_HPP

#include <map>
#include <string>
#include <vector>

#include "calico/analysis.hpp"
#include "calico/model.hpp"
#include "calico/plan.hpp"
#include "calico/reconfig.hpp"
#include "calico/runtime.hpp"

namespace calico {

/// The diffable projection of a deployment: structure plus installed probes.
/// Contract edits take effect through re-analysis during evolve, not through
/// reconfiguration ops.
struct DeployedModel {
    Architecture architecture;
    std::vector<Probe> probes;
};

/// Computes the ordered edit script turning `old_model` into `new_model`.
/// Elements are matched by name/id; a changed element becomes remove+add,
/// dragging its incident connectors (and their probes) along so that every
/// op's precondition holds in sequence. diff(m, m) is empty.
ModelDiff diff(const DeployedModel& old_model, const DeployedModel& new_model);

/// Replays a diff at the model level (audit and testing mirror of the
/// runtime's apply_ops). Contracts that no longer resolve after a removal
/// are dropped. Throws std::invalid_argument on an inapplicable op.
DeployedModel apply(DeployedModel base, const ModelDiff& diff);

struct EvolveOutcome {
    bool accepted = false;
    AnalysisReport report;
    DebugPlan new_plan;  // set when accepted
    ModelDiff diff;      // set when accepted
};

/// Steps 8 -> 2 of the cycle: re-analyzes the edited model, and only when
/// the gate passes re-plans probes, quiesces, applies the diff and resumes.
/// A rejected evolution leaves the runtime view untouched. Deliveries
/// drained during the quiesce window are appended to `trace` when given.
EvolveOutcome evolve(RunningSystem& sys, const Architecture& new_arch,
                     std::map<std::string, BehaviorScript> scripts, const Action& default_action,
                     const std::map<std::string, Action>& overrides = {},
                     const AnalysisOptions& options = {}, Trace* trace = nullptr);

}  // namespace calico

#endif  // CALICO_SYNC_HPP
