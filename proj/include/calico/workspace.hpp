#ifndef CALICO_WORKSPACE_HPP
#define CALICO_WORKSPACE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calico/analysis.hpp"
#include "calico/debugger.hpp"
#include "calico/model.hpp"
#include "calico/plan.hpp"
#include "calico/runtime.hpp"
#include "calico/sync.hpp"

namespace calico {

struct WorkspaceConfig {
    Action default_action;  // Notify unless config.json says otherwise
    std::uint64_t seed = 0;
    std::size_t state_space_cap = 1000000;
    std::map<std::string, Action> overrides;  // per check id

    AnalysisOptions analysis_options() const { return {state_space_cap}; }
};

/// A directory owning one designed-and-deployed system: the model files,
/// behavior scripts, scenarios, reconfiguration targets, the persisted
/// runtime state and the append-only session report.
class Workspace {
public:
    static Workspace open(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    const WorkspaceConfig& config() const { return config_; }

    std::filesystem::path scripts_dir() const { return root_ / "scripts"; }
    std::filesystem::path scenarios_dir() const { return root_ / "scenarios"; }
    std::filesystem::path reconfig_dir() const { return root_ / "reconfig"; }
    std::filesystem::path state_dir() const { return root_ / ".calico"; }
    std::filesystem::path state_file() const { return state_dir() / "state.json"; }
    std::filesystem::path plan_file() const { return state_dir() / "plan.json"; }
    std::filesystem::path trace_file() const { return state_dir() / "trace.jsonl"; }
    std::filesystem::path outcomes_file() const { return state_dir() / "outcomes.jsonl"; }
    std::filesystem::path report_file() const { return root_ / "session-report.txt"; }
    std::filesystem::path lock_file() const { return state_dir() / "lock"; }

    bool has_deployed_system() const { return std::filesystem::exists(state_file()); }

    /// Parses every *.script file in scripts/, keyed by owning component.
    std::map<std::string, BehaviorScript> load_scripts() const;
    Scenario load_scenario(const std::string& name) const;

    struct DeployedState {
        Architecture architecture;
        DebugPlan plan;
        std::uint64_t seed = 0;
        Tick clock = 0;
        RunStatus status = RunStatus::Running;
        std::map<std::string, InstanceState> instances;
        std::vector<std::string> construction_log;
    };

    std::optional<DeployedState> load_state() const;
    void save_state(const DeployedState& state) const;
    static DeployedState snapshot(const RunningSystem& sys, const Architecture& arch,
                                  const DebugPlan& plan);

    void reset_run_logs() const;  // fresh trace/outcome logs on deploy
    void append_trace(const Trace& trace) const;
    void append_outcomes(const std::vector<CheckOutcome>& outcomes) const;
    void append_report_section(const std::string& title, const std::string& body) const;

private:
    explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

    std::filesystem::path root_;
    WorkspaceConfig config_;
};

/// One command at a time per workspace: created on entry, removed on exit.
class WorkspaceLock {
public:
    explicit WorkspaceLock(const Workspace& ws);
    ~WorkspaceLock();
    WorkspaceLock(const WorkspaceLock&) = delete;
    WorkspaceLock& operator=(const WorkspaceLock&) = delete;

private:
    std::filesystem::path path_;
};

/// Result of running one scenario under the debugger.
struct RunSummary {
    Trace trace;
    std::vector<CheckOutcome> outcomes;
    std::size_t violations = 0;
    std::vector<std::string> notifications;  // session-report lines
    bool reconfigured = false;
    std::string reconfigure_note;
    Architecture final_architecture;  // may differ after a Reconfigure action
    DebugPlan final_plan;
};

/// Drives a scenario tick by tick: checks resume synchronously on each
/// reified event; violation actions run after the tick drains. A
/// Reconfigure action fires at most once per run (quiesce, evolve, resume,
/// then the scenario continues from the current tick).
RunSummary run_scenario_session(Workspace& ws, RunningSystem& sys, const Architecture& deployed,
                                const DebugPlan& plan, const Scenario& scenario);

}  // namespace calico

#endif  // CALICO_WORKSPACE_HPP
