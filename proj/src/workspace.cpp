#include "calico/workspace.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "calico/adl.hpp"
#include "calico/scripts.hpp"

namespace calico {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out << content;
}

void append_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw RuntimeError("cannot append to " + path.string());
    out << content;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

Workspace Workspace::open(std::filesystem::path root) {
    Workspace ws(std::filesystem::absolute(std::move(root)));
    const auto config_path = ws.root_ / "config.json";
    if (std::filesystem::exists(config_path)) {
        json j = json::parse(read_file(config_path));
        if (j.contains("defaultAction"))
            ws.config_.default_action = action_from_json_string(j["defaultAction"].dump());
        if (j.contains("seed")) ws.config_.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("stateSpaceCap"))
            ws.config_.state_space_cap = j["stateSpaceCap"].get<std::size_t>();
        if (j.contains("actionOverrides"))
            for (const auto& [check_id, action] : j["actionOverrides"].items())
                ws.config_.overrides[check_id] = action_from_json_string(action.dump());
    }
    return ws;
}

std::map<std::string, BehaviorScript> Workspace::load_scripts() const {
    std::map<std::string, BehaviorScript> scripts;
    if (!std::filesystem::exists(scripts_dir())) return scripts;

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(scripts_dir()))
        if (entry.is_regular_file() && entry.path().extension() == ".script")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
        ParsedFile<BehaviorScript> parsed = parse_script(read_file(file));
        if (!parsed.ok())
            throw RuntimeError(file.string() + ": " + parsed.errors.front().to_string());
        const std::string& component = parsed.value->component;
        if (scripts.count(component))
            throw RuntimeError(file.string() + ": component " + component +
                               " already has a script");
        scripts[component] = std::move(*parsed.value);
    }
    return scripts;
}

Scenario Workspace::load_scenario(const std::string& name) const {
    const auto path = scenarios_dir() / (name + ".scenario");
    if (!std::filesystem::exists(path))
        throw RuntimeError("scenario \"" + name + "\" not found (" + path.string() + ")");
    ParsedFile<Scenario> parsed = parse_scenario(read_file(path));
    if (!parsed.ok()) throw RuntimeError(path.string() + ": " + parsed.errors.front().to_string());
    return std::move(*parsed.value);
}

std::optional<Workspace::DeployedState> Workspace::load_state() const {
    if (!has_deployed_system()) return std::nullopt;
    json j = json::parse(read_file(state_file()));

    DeployedState state;
    ParseResult parsed = parse(j.at("model").get<std::string>());
    if (!parsed.ok())
        throw RuntimeError("persisted model no longer parses: " +
                           parsed.errors.front().to_string());
    state.architecture = std::move(*parsed.architecture);
    state.plan = DebugPlan::from_json(j.at("plan").dump());
    state.seed = j.at("seed").get<std::uint64_t>();
    state.clock = j.at("clock").get<Tick>();
    state.status = j.at("status").get<std::string>() == "quiesced" ? RunStatus::Quiesced
                                                                   : RunStatus::Running;
    for (const auto& [name, counters] : j.at("instances").items())
        state.instances[name] = {counters.at("received").get<std::uint64_t>(),
                                 counters.at("emitted").get<std::uint64_t>()};
    for (const auto& line : j.at("constructionLog"))
        state.construction_log.push_back(line.get<std::string>());
    return state;
}

void Workspace::save_state(const DeployedState& state) const {
    std::filesystem::create_directories(state_dir());
    json j;
    j["model"] = serialize(state.architecture);
    j["plan"] = json::parse(state.plan.to_json());
    j["seed"] = state.seed;
    j["clock"] = state.clock;
    j["status"] = state.status == RunStatus::Quiesced ? "quiesced" : "running";
    json instances = json::object();
    for (const auto& [name, counters] : state.instances) {
        instances[name] = {{"received", counters.received}, {"emitted", counters.emitted}};
    }
    j["instances"] = std::move(instances);
    j["constructionLog"] = state.construction_log;
    write_file(state_file(), j.dump(2) + "\n");
    write_file(plan_file(), state.plan.to_json() + "\n");
}

Workspace::DeployedState Workspace::snapshot(const RunningSystem& sys, const Architecture& arch,
                                             const DebugPlan& plan) {
    DeployedState state;
    state.architecture = arch;
    state.plan = plan;
    state.seed = sys.seed();
    state.clock = sys.clock();
    state.status = sys.status();
    state.instances = sys.instances();
    state.construction_log = sys.construction_log();
    return state;
}

void Workspace::reset_run_logs() const {
    std::filesystem::create_directories(state_dir());
    write_file(trace_file(), "");
    write_file(outcomes_file(), "");
}

void Workspace::append_trace(const Trace& trace) const {
    std::filesystem::create_directories(state_dir());
    append_file(trace_file(), trace.to_jsonl());
}

void Workspace::append_outcomes(const std::vector<CheckOutcome>& outcomes) const {
    std::filesystem::create_directories(state_dir());
    std::string lines;
    for (const auto& o : outcomes) {
        lines += o.to_json_line();
        lines += "\n";
    }
    append_file(outcomes_file(), lines);
}

void Workspace::append_report_section(const std::string& title, const std::string& body) const {
    std::string section = "== " + title + " " + utc_timestamp() + " ==\n" + body;
    if (section.back() != '\n') section += "\n";
    section += "\n";
    append_file(report_file(), section);
}

WorkspaceLock::WorkspaceLock(const Workspace& ws) : path_(ws.lock_file()) {
    std::filesystem::create_directories(path_.parent_path());
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw RuntimeError("workspace is locked by another command (remove " + path_.string() +
                           " if stale)");
    ::close(fd);
}

WorkspaceLock::~WorkspaceLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

RunSummary run_scenario_session(Workspace& ws, RunningSystem& sys, const Architecture& deployed,
                                const DebugPlan& plan, const Scenario& scenario) {
    if (sys.status() != RunStatus::Running)
        throw RuntimeError("run: system is not running");

    RunSummary summary;
    summary.final_architecture = deployed;
    summary.final_plan = plan;

    // Checks resume synchronously on each event; the action in force is the
    // one configured on the check at that moment.
    std::vector<std::pair<CheckOutcome, Action>> pending;
    sys.set_event_observer([&](const ReifiedEvent& event) {
        for (auto& outcome : resume_checks(event, summary.final_plan)) {
            Action action;  // defaults to Notify if the check vanished mid-run
            for (const auto& check : summary.final_plan.checks)
                if (check.id == outcome.check) action = check.action;
            pending.emplace_back(std::move(outcome), action);
        }
    });

    bool reconfigure_fired = false;
    ActionContext ctx;
    ctx.root = ws.root();
    ctx.notify = [&](const std::string& line) { summary.notifications.push_back(line); };
    ctx.reconfigure = [&](const std::string& script_name) {
        const auto target = ws.reconfig_dir() / (script_name + ".adl");
        if (!std::filesystem::exists(target))
            throw RuntimeError("reconfiguration script \"" + script_name + "\" not found (" +
                               target.string() + ")");
        std::ifstream in(target);
        std::ostringstream os;
        os << in.rdbuf();
        ParseResult parsed = parse(os.str());
        if (!parsed.ok())
            throw RuntimeError(target.string() + ": " + parsed.errors.front().to_string());

        EvolveOutcome evolved =
            evolve(sys, *parsed.architecture, ws.load_scripts(), ws.config().default_action,
                   ws.config().overrides, ws.config().analysis_options(), &summary.trace);
        if (evolved.accepted) {
            summary.final_architecture = *parsed.architecture;
            summary.final_plan = evolved.new_plan;
            summary.reconfigured = true;
            summary.reconfigure_note = "reconfiguration \"" + script_name +
                                       "\" accepted; scenario resumed at tick " +
                                       std::to_string(sys.clock());
        } else {
            summary.reconfigure_note =
                "reconfiguration \"" + script_name + "\" rejected by the analysis gate";
        }
        return evolved.accepted;
    };

    auto process_pending = [&]() {
        // An action may re-enter the dispatcher (Reconfigure quiesces and
        // drains), so take the batch out before walking it.
        while (!pending.empty()) {
            auto batch = std::move(pending);
            pending.clear();
            for (auto& [outcome, action] : batch) {
                if (outcome.result == OutcomeResult::Violation) {
                    summary.violations += 1;
                    Action effective = action;
                    // At most one reconfiguration per run; repeats degrade to Notify.
                    if (effective.type == ActionType::Reconfigure && reconfigure_fired)
                        effective = Action{ActionType::Notify, ""};
                    if (effective.type == ActionType::Reconfigure) reconfigure_fired = true;
                    execute_action(outcome, effective, ctx);
                    if (effective.type != ActionType::Notify) {
                        // Violations always surface to the architect as well.
                        std::ostringstream os;
                        os << "violation: check " << outcome.check << " at tick " << outcome.tick
                           << " (" << outcome.message << ")";
                        summary.notifications.push_back(os.str());
                    }
                }
                summary.outcomes.push_back(std::move(outcome));
            }
        }
    };

    std::size_t i = 0;
    const auto& stimuli = scenario.stimuli;
    while (i < stimuli.size()) {
        const Tick tick = stimuli[i].tick;
        while (i < stimuli.size() && stimuli[i].tick == tick) {
            sys.inject(stimuli[i], summary.trace);
            ++i;
        }
        sys.drain(summary.trace);
        process_pending();
    }
    sys.drain(summary.trace);
    process_pending();
    sys.set_event_observer(nullptr);
    return summary;
}

}  // namespace calico
