#ifndef CALICO_DEBUGGER_HPP
#define CALICO_DEBUGGER_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calico/plan.hpp"
#include "calico/runtime.hpp"

namespace calico {

enum class OutcomeResult { Pass, Violation, EvalError };

std::string to_string(OutcomeResult r);

struct CheckOutcome {
    std::string check;
    std::string connector;
    Tick tick = 0;
    OutcomeResult result = OutcomeResult::Pass;
    std::string message;   // violation or evaluation-error detail
    AttrMap captured;      // values the predicate was evaluated on
    std::optional<Action> action_taken;

    std::string to_json_line() const;  // violation-log JSONL schema
};

/// True iff the captured values satisfy the predicate. Missing or
/// mistyped captures throw RuntimeError.
bool predicate_holds(const ResidualPredicate& predicate, const AttrMap& captured);

/// Resumes the statically deferred checks bound to this event's probe:
/// one outcome per check, evaluated on the captured values. A missing
/// capture yields an explicit EvalError outcome, never a silent pass.
std::vector<CheckOutcome> resume_checks(const ReifiedEvent& event, const DebugPlan& plan);

/// Side-effect hooks the debugger acts through; the session wires them to
/// the workspace and the sync engine.
struct ActionContext {
    std::filesystem::path root;                                // log paths resolve under here
    std::function<void(const std::string&)> notify;            // session report entry
    std::function<bool(const std::string&)> reconfigure;       // returns true when accepted
};

struct ActionEffect {
    std::string description;
    bool reconfigure_accepted = false;
};

/// Executes the configured action for a violation and records it on the
/// outcome. Throws std::invalid_argument for non-violation outcomes.
ActionEffect execute_action(CheckOutcome& outcome, const Action& action, const ActionContext& ctx);

}  // namespace calico

#endif  // CALICO_DEBUGGER_HPP
