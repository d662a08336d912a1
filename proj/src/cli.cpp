#include "calico/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "calico/adl.hpp"
#include "calico/analysis.hpp"
#include "calico/debugger.hpp"
#include "calico/plan.hpp"
#include "calico/runtime.hpp"
#include "calico/scripts.hpp"
#include "calico/sync.hpp"
#include "calico/workspace.hpp"

namespace calico {

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kAnalysisFailure = 1;
constexpr int kUsageFailure = 2;

struct GlobalOptions {
    std::string workspace = ".";
    bool json = false;
    std::optional<std::uint64_t> seed;
};

std::optional<std::string> read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int report_parse_errors(const std::string& file, const std::vector<ParseError>& errors,
                        std::ostream& err) {
    for (const auto& e : errors) err << file << ":" << e.to_string() << "\n";
    return kUsageFailure;
}

void print_report(const AnalysisReport& report, std::ostream& out) {
    out << "gate: " << (report.gate_passed ? "PASSED" : "FAILED") << "\n";
    for (const auto& v : report.verdicts) {
        out << "  [" << to_string(v.analysis) << "] " << v.subject << ": " << to_string(v.kind);
        if (v.kind == VerdictKind::Incompatible) out << " — " << v.reason;
        out << "\n";
        for (const auto& r : v.residuals) out << "      residual: " << r.describe() << "\n";
    }
}

std::string report_summary_line(const AnalysisReport& report) {
    std::size_t partial = 0, incompatible = 0;
    for (const auto& v : report.verdicts) {
        if (v.kind == VerdictKind::PartiallyCompatible) ++partial;
        if (v.kind == VerdictKind::Incompatible) ++incompatible;
    }
    std::ostringstream os;
    os << report.verdicts.size() << " verdict(s), " << partial << " partially compatible, "
       << incompatible << " incompatible";
    return os.str();
}

// Parses a model file; on failure prints errors and returns a usage exit.
std::optional<Architecture> load_model(const std::string& path, std::ostream& err, int& exit_code) {
    auto text = read_text_file(path);
    if (!text) {
        err << "cannot read " << path << "\n";
        exit_code = kUsageFailure;
        return std::nullopt;
    }
    ParseResult parsed = parse(*text);
    if (!parsed.ok()) {
        exit_code = report_parse_errors(path, parsed.errors, err);
        return std::nullopt;
    }
    return std::move(parsed.architecture);
}

int cmd_check(const GlobalOptions& global, const std::string& model_path, std::ostream& out,
              std::ostream& err) {
    int exit_code = kOk;
    auto arch = load_model(model_path, err, exit_code);
    if (!arch) return exit_code;

    Workspace ws = Workspace::open(global.workspace);
    AnalysisReport report;
    try {
        report = analyze(*arch, ws.config().analysis_options());
    } catch (const AnalysisError& e) {
        err << "analysis error: " << e.what() << "\n";
        return kAnalysisFailure;
    }
    if (global.json)
        out << report.to_json() << "\n";
    else
        print_report(report, out);
    return report.gate_passed ? kOk : kAnalysisFailure;
}

std::string script_skeleton(const Component& component) {
    std::ostringstream os;
    os << "// behavior skeleton for " << component.name << " — replace the stubs with rules\n";
    os << "script " << component.name << " {\n";
    std::string first_out;
    bool has_in = false;
    for (const auto& p : component.ports) {
        if (p.direction == Direction::Out && first_out.empty()) first_out = p.name;
        if (p.direction == Direction::In) has_in = true;
    }
    for (const auto& p : component.ports) {
        if (p.direction != Direction::In) continue;
        os << "  // on " << p.name;
        if (!first_out.empty()) os << " emit " << first_out << " size=size type=type";
        os << "\n";
    }
    if (!has_in) {
        for (const auto& p : component.ports)
            if (p.direction == Direction::Out)
                os << "  // source " << p.name << " size=1kB type=txt\n";
    }
    os << "}\n";
    return os.str();
}

int cmd_scaffold(const GlobalOptions& global, const std::string& model_path, std::ostream& out,
                 std::ostream& err) {
    int exit_code = kOk;
    auto arch = load_model(model_path, err, exit_code);
    if (!arch) return exit_code;

    Workspace ws = Workspace::open(global.workspace);
    WorkspaceLock lock(ws);
    std::filesystem::create_directories(ws.scripts_dir());

    std::vector<std::string> created;
    for (const auto& component : arch->components) {
        if (component.ports.empty()) continue;
        const std::string filename =
            component.script ? *component.script : component.name + ".script";
        const auto path = ws.scripts_dir() / filename;
        if (std::filesystem::exists(path)) continue;  // never overwrite
        std::ofstream file(path);
        file << script_skeleton(component);
        created.push_back(filename);
    }
    if (created.empty()) {
        out << "nothing to scaffold: every component already has a script file\n";
    } else {
        for (const auto& name : created) out << "wrote scripts/" << name << "\n";
    }
    return kOk;
}

int cmd_deploy(const GlobalOptions& global, const std::string& model_path, std::ostream& out,
               std::ostream& err) {
    int exit_code = kOk;
    auto arch = load_model(model_path, err, exit_code);
    if (!arch) return exit_code;

    Workspace ws = Workspace::open(global.workspace);
    WorkspaceLock lock(ws);

    AnalysisReport report;
    try {
        report = analyze(*arch, ws.config().analysis_options());
    } catch (const AnalysisError& e) {
        err << "analysis error: " << e.what() << "\n";
        return kAnalysisFailure;
    }
    if (!report.gate_passed) {
        err << "deploy refused: the analysis gate did not pass\n";
        print_report(report, err);
        return kAnalysisFailure;
    }

    const std::uint64_t seed = global.seed.value_or(ws.config().seed);
    try {
        DebugPlan debug_plan = plan(report, ws.config().default_action, ws.config().overrides);
        DeploymentConfig config = weave(debug_plan, *arch);
        RunningSystem sys =
            instantiate(*arch, config, ws.load_scripts(), seed, ws.config().analysis_options());

        ws.reset_run_logs();
        ws.save_state(Workspace::snapshot(sys, *arch, debug_plan));

        std::ostringstream body;
        body << "model: " << arch->name << " (" << model_path << ")\n";
        body << "gate: passed (" << report_summary_line(report) << ")\n";
        body << "plan: " << debug_plan.probes.size() << " probe(s), " << debug_plan.checks.size()
             << " check(s)\n";
        body << "construction: " << sys.construction_log().size() << " operation(s), seed "
             << seed << "\n";
        ws.append_report_section("deploy", body.str());

        if (global.json) {
            json j;
            j["gate"] = true;
            j["constructionOps"] = sys.construction_log().size();
            j["probes"] = debug_plan.probes.size();
            j["checks"] = debug_plan.checks.size();
            j["seed"] = seed;
            out << j.dump(2) << "\n";
        } else {
            out << "deployed " << arch->name << ": " << sys.components().size()
                << " component(s), " << sys.bindings().size() << " binding(s), "
                << sys.probes().size() << " probe(s)\n";
            for (const auto& line : sys.construction_log()) out << "  " << line << "\n";
        }
        return kOk;
    } catch (const RuntimeError& e) {
        err << "deploy failed: " << e.what() << "\n";
        return kAnalysisFailure;
    }
}

int cmd_run(const GlobalOptions& global, const std::string& scenario_name, std::ostream& out,
            std::ostream& err) {
    Workspace ws = Workspace::open(global.workspace);
    if (!ws.has_deployed_system()) {
        err << "no deployed system in workspace " << ws.root().string() << " (run deploy first)\n";
        return kUsageFailure;
    }
    WorkspaceLock lock(ws);

    // Missing inputs are usage errors; failures during the run are not.
    std::optional<Workspace::DeployedState> state;
    Scenario scenario;
    try {
        state = ws.load_state();
        scenario = ws.load_scenario(scenario_name);
    } catch (const RuntimeError& e) {
        err << "run failed: " << e.what() << "\n";
        return kUsageFailure;
    }

    try {
        RunningSystem sys = RunningSystem::rehydrate(
            state->architecture, state->plan.probes, ws.load_scripts(), state->seed, state->clock,
            state->status, state->instances, state->construction_log);

        RunSummary summary =
            run_scenario_session(ws, sys, state->architecture, state->plan, scenario);

        ws.append_trace(summary.trace);
        ws.append_outcomes(summary.outcomes);
        ws.save_state(Workspace::snapshot(sys, summary.final_architecture, summary.final_plan));

        std::ostringstream body;
        body << "scenario: " << scenario.name << "\n";
        body << "trace: " << summary.trace.delivery_count() << " delivery(ies), "
             << summary.trace.event_count() << " event(s)\n";
        body << "outcomes: " << summary.outcomes.size() << " check(s), " << summary.violations
             << " violation(s)\n";
        for (const auto& line : summary.notifications) body << "  " << line << "\n";
        if (!summary.reconfigure_note.empty()) body << summary.reconfigure_note << "\n";
        ws.append_report_section("run", body.str());

        if (global.json) {
            json j;
            j["scenario"] = scenario.name;
            j["deliveries"] = summary.trace.delivery_count();
            j["events"] = summary.trace.event_count();
            j["violations"] = summary.violations;
            j["outcomes"] = json::array();
            for (const auto& o : summary.outcomes) j["outcomes"].push_back(json::parse(o.to_json_line()));
            if (summary.reconfigured) j["reconfigured"] = true;
            out << j.dump(2) << "\n";
        } else {
            out << "scenario " << scenario.name << ": " << summary.trace.delivery_count()
                << " delivery(ies), " << summary.trace.event_count() << " event(s), "
                << summary.violations << " violation(s)\n";
            for (const auto& line : summary.notifications) out << "  " << line << "\n";
            if (!summary.reconfigure_note.empty()) out << "  " << summary.reconfigure_note << "\n";
        }
        return summary.violations > 0 ? kAnalysisFailure : kOk;
    } catch (const RuntimeError& e) {
        err << "run failed: " << e.what() << "\n";
        return kAnalysisFailure;
    }
}

int cmd_events(const GlobalOptions& global, std::ostream& out, std::ostream& err) {
    Workspace ws = Workspace::open(global.workspace);
    if (!ws.has_deployed_system()) {
        err << "no deployed system in workspace " << ws.root().string() << "\n";
        return kUsageFailure;
    }
    auto text = read_text_file(ws.trace_file());
    if (text) out << *text;
    return kOk;
}

int cmd_status(const GlobalOptions& global, std::ostream& out, std::ostream& err) {
    Workspace ws = Workspace::open(global.workspace);
    if (!ws.has_deployed_system()) {
        err << "no deployed system in workspace " << ws.root().string() << "\n";
        return kUsageFailure;
    }
    auto state = ws.load_state();

    if (global.json) {
        json j;
        j["model"] = state->architecture.name;
        j["status"] = state->status == RunStatus::Running ? "running" : "quiesced";
        j["clock"] = state->clock;
        j["seed"] = state->seed;
        json components = json::array();
        for (const auto& c : state->architecture.components) components.push_back(c.name);
        j["components"] = std::move(components);
        json bindings = json::array();
        for (const auto& k : state->architecture.connectors) bindings.push_back(k.id);
        j["bindings"] = std::move(bindings);
        json probes = json::array();
        for (const auto& p : state->plan.probes) probes.push_back(p.id);
        j["probes"] = std::move(probes);
        json instances = json::object();
        for (const auto& [name, counters] : state->instances)
            instances[name] = {{"received", counters.received}, {"emitted", counters.emitted}};
        j["instances"] = std::move(instances);
        out << j.dump(2) << "\n";
    } else {
        out << "model: " << state->architecture.name << "\n";
        out << "status: " << (state->status == RunStatus::Running ? "running" : "quiesced")
            << ", clock: " << state->clock << ", seed: " << state->seed << "\n";
        out << "components (" << state->architecture.components.size() << "):";
        for (const auto& c : state->architecture.components) out << " " << c.name;
        out << "\n";
        out << "bindings (" << state->architecture.connectors.size() << "):";
        for (const auto& k : state->architecture.connectors) out << " " << k.id;
        out << "\n";
        out << "probes (" << state->plan.probes.size() << "):";
        for (const auto& p : state->plan.probes) out << " " << p.id;
        out << "\n";
    }
    return kOk;
}

int cmd_evolve(const GlobalOptions& global, const std::string& model_path, std::ostream& out,
               std::ostream& err) {
    Workspace ws = Workspace::open(global.workspace);
    if (!ws.has_deployed_system()) {
        err << "no deployed system in workspace " << ws.root().string() << " (run deploy first)\n";
        return kUsageFailure;
    }

    int exit_code = kOk;
    auto new_arch = load_model(model_path, err, exit_code);
    if (!new_arch) return exit_code;

    WorkspaceLock lock(ws);
    auto state = ws.load_state();
    RunningSystem sys = RunningSystem::rehydrate(
        state->architecture, state->plan.probes, ws.load_scripts(), state->seed, state->clock,
        state->status, state->instances, state->construction_log);

    try {
        Trace trace;
        EvolveOutcome outcome =
            evolve(sys, *new_arch, ws.load_scripts(), ws.config().default_action,
                   ws.config().overrides, ws.config().analysis_options(), &trace);

        if (!outcome.accepted) {
            std::ostringstream body;
            body << "model: " << new_arch->name << " (" << model_path << ")\n";
            body << "REJECTED: the gate did not pass (" << report_summary_line(outcome.report)
                 << ")\n";
            print_report(outcome.report, body);
            ws.append_report_section("evolve", body.str());
            err << "evolve rejected: the analysis gate did not pass; the runtime is unchanged\n";
            if (global.json)
                out << outcome.report.to_json() << "\n";
            else
                print_report(outcome.report, err);
            return kAnalysisFailure;
        }

        ws.append_trace(trace);
        ws.save_state(Workspace::snapshot(sys, canonicalize(*new_arch), outcome.new_plan));

        std::ostringstream body;
        body << "model: " << new_arch->name << " (" << model_path << ")\n";
        body << "ACCEPTED (" << report_summary_line(outcome.report) << ")\n";
        print_report(outcome.report, body);
        body << "diff: " << outcome.diff.ops.size() << " op(s)\n";
        for (const auto& op : outcome.diff.ops) body << "  " << op.describe() << "\n";
        ws.append_report_section("evolve", body.str());

        if (global.json) {
            json j;
            j["accepted"] = true;
            j["report"] = json::parse(outcome.report.to_json());
            j["diff"] = json::parse(outcome.diff.to_json());
            out << j.dump(2) << "\n";
        } else {
            out << "evolve accepted: " << outcome.diff.ops.size() << " op(s)\n";
            for (const auto& op : outcome.diff.ops) out << "  " << op.describe() << "\n";
            print_report(outcome.report, out);
        }
        return kOk;
    } catch (const AnalysisError& e) {
        err << "analysis error: " << e.what() << "\n";
        return kAnalysisFailure;
    } catch (const RuntimeError& e) {
        err << "evolve failed: " << e.what() << "\n";
        return kAnalysisFailure;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"design, check, deploy, debug and evolve component architectures"};
    app.name("calico");

    GlobalOptions global;
    app.add_option("--workspace", global.workspace, "workspace directory")
        ->envname("CALICO_WORKSPACE");
    app.add_flag("--json", global.json, "machine-readable output");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "seed for the simulated runtime");

    app.fallthrough();  // global flags may follow the subcommand
    std::string model_path, scenario_name;
    auto* check = app.add_subcommand("check", "statically analyze a model");
    check->add_option("model", model_path, "ADL model file")->required();
    auto* scaffold = app.add_subcommand("scaffold", "generate behavior script skeletons");
    scaffold->add_option("model", model_path, "ADL model file")->required();
    auto* deploy = app.add_subcommand("deploy", "analyze, plan, weave and instantiate a model");
    deploy->add_option("model", model_path, "ADL model file")->required();
    auto* run = app.add_subcommand("run", "run a scenario against the deployed system");
    run->add_option("scenario", scenario_name, "scenario name (scenarios/<name>.scenario)")
        ->required();
    auto* events = app.add_subcommand("events", "print the reified event/message trace");
    auto* status = app.add_subcommand("status", "print the runtime view");
    auto* evolve_cmd = app.add_subcommand("evolve", "propagate an edited model to the runtime");
    evolve_cmd->add_option("model", model_path, "ADL model file")->required();
    app.require_subcommand(1);

    std::vector<std::string> argv(args.rbegin(), args.rend());  // CLI11 takes a reversed vector
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageFailure;
    }
    if (seed_opt->count() > 0) global.seed = seed_value;

    try {
        if (check->parsed()) return cmd_check(global, model_path, out, err);
        if (scaffold->parsed()) return cmd_scaffold(global, model_path, out, err);
        if (deploy->parsed()) return cmd_deploy(global, model_path, out, err);
        if (run->parsed()) return cmd_run(global, scenario_name, out, err);
        if (events->parsed()) return cmd_events(global, out, err);
        if (status->parsed()) return cmd_status(global, out, err);
        if (evolve_cmd->parsed()) return cmd_evolve(global, model_path, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kAnalysisFailure;
    }
    err << "usage error: no command\n";
    return kUsageFailure;
}

}  // namespace calico
