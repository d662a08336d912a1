#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "calico/analysis.hpp"
#include "calico/debugger.hpp"
#include "calico/plan.hpp"
#include "helpers.hpp"

using namespace calico;
using namespace calico_tests;

namespace {

DebugPlan phr_plan() {
    return plan(analyze(load_asset_model("phr.adl")), Action{ActionType::Notify, ""});
}

ReifiedEvent display_event(std::int64_t size, const std::string& type, Tick tick = 2) {
    ReifiedEvent event;
    event.probe = "probe-c_display";
    event.connector = "c_display";
    event.tick = tick;
    event.captured["Size"] = size;
    event.captured["Type"] = type;
    return event;
}

}  // namespace

TEST_CASE("a small text document passes both PHR checks") {
    auto outcomes = resume_checks(display_event(2000000, "txt"), phr_plan());
    REQUIRE(outcomes.size() == 2);
    for (const auto& o : outcomes) CHECK(o.result == OutcomeResult::Pass);
}

TEST_CASE("an oversized jpg violates only the size check") {
    auto outcomes = resume_checks(display_event(50000000, "jpg"), phr_plan());
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].check == "check-c_display-size");
    CHECK(outcomes[0].result == OutcomeResult::Violation);
    CHECK(outcomes[0].message.find("data too large") != std::string::npos);
    CHECK(outcomes[1].result == OutcomeResult::Pass);
}

TEST_CASE("an event on a probe without checks yields no outcomes") {
    DebugPlan p;
    p.probes.push_back({"probe-x", "x", {Variable::Size}});
    ReifiedEvent event;
    event.probe = "probe-x";
    event.connector = "x";
    event.captured["Size"] = std::int64_t{1};
    CHECK(resume_checks(event, p).empty());
}

TEST_CASE("an event naming an unknown probe is an error") {
    CHECK_THROWS_AS(resume_checks(ReifiedEvent{"ghost", "x", {}, 0}, phr_plan()), RuntimeError);
}

TEST_CASE("a missing captured variable is an explicit evaluation error") {
    ReifiedEvent event;
    event.probe = "probe-c_display";
    event.connector = "c_display";
    event.captured["Type"] = std::string("txt");  // Size deliberately absent
    auto outcomes = resume_checks(event, phr_plan());
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].result == OutcomeResult::EvalError);
    CHECK(outcomes[0].message.find("Size") != std::string::npos);
    CHECK(outcomes[1].result == OutcomeResult::Pass);
}

TEST_CASE("latency predicates compare against the bound") {
    ResidualPredicate p;
    p.connector = "k";
    p.variable = Variable::Latency;
    p.bound = 30;
    AttrMap fast{{"Latency", std::int64_t{10}}};
    AttrMap slow{{"Latency", std::int64_t{50}}};
    CHECK(predicate_holds(p, fast));
    CHECK(!predicate_holds(p, slow));
}

TEST_CASE("every outcome re-evaluates consistently with its recorded values") {
    // Independent re-evaluation: read the predicate from the plan and apply
    // it by hand to the outcome's captured values.
    DebugPlan p = phr_plan();
    for (std::int64_t size : {0L, 9999999L, 10000000L, 10000001L, 50000000L}) {
        for (const std::string& type : {"txt", "jpg", "dicom"}) {
            for (auto& outcome : resume_checks(display_event(size, type), p)) {
                const ResidualCheck* check = nullptr;
                for (const auto& c : p.checks)
                    if (c.id == outcome.check) check = &c;
                REQUIRE(check != nullptr);
                bool expected_pass;
                if (check->predicate.variable == Variable::Size)
                    expected_pass = size >= 0 && static_cast<Bytes>(size) <= check->predicate.bound;
                else
                    expected_pass = check->predicate.allowed.count(type) > 0;
                CHECK((outcome.result == OutcomeResult::Pass) == expected_pass);
                CHECK((outcome.result == OutcomeResult::Violation) == !expected_pass);
            }
        }
    }
}

TEST_CASE("each matching event and check pair produces exactly one outcome") {
    DebugPlan p = phr_plan();
    auto outcomes = resume_checks(display_event(1, "txt"), p);
    std::set<std::string> seen;
    for (const auto& o : outcomes) CHECK(seen.insert(o.check).second);
    CHECK(outcomes.size() == p.checks.size());  // both checks share this probe
}

TEST_CASE("notify appends to the session report hook") {
    auto outcomes = resume_checks(display_event(50000000, "jpg"), phr_plan());
    CheckOutcome& violation = outcomes[0];
    REQUIRE(violation.result == OutcomeResult::Violation);

    std::vector<std::string> notes;
    ActionContext ctx;
    ctx.notify = [&](const std::string& line) { notes.push_back(line); };
    ActionEffect effect = execute_action(violation, Action{ActionType::Notify, ""}, ctx);
    CHECK(effect.description == "notified architect");
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].find("check-c_display-size") != std::string::npos);
    CHECK(notes[0].find("Size=50000000") != std::string::npos);
    CHECK(violation.action_taken.has_value());
}

TEST_CASE("log appends exactly one JSON line per violation") {
    TempDir dir("log");
    auto outcomes = resume_checks(display_event(50000000, "jpg"), phr_plan());
    CheckOutcome& violation = outcomes[0];

    ActionContext ctx;
    ctx.root = dir.path();
    execute_action(violation, Action{ActionType::Log, "violations.jsonl"}, ctx);
    execute_action(violation, Action{ActionType::Log, "violations.jsonl"}, ctx);

    std::ifstream in(dir.path() / "violations.jsonl");
    std::string line;
    std::size_t lines = 0;
    nlohmann::json parsed;
    while (std::getline(in, line)) {
        parsed = nlohmann::json::parse(line);
        ++lines;
    }
    CHECK(lines == 2);
    CHECK(parsed.at("check") == "check-c_display-size");
    CHECK(parsed.at("connector") == "c_display");
    CHECK(parsed.at("result") == "violation");
    CHECK(parsed.at("captured").at("Size") == 50000000);
}

TEST_CASE("reconfigure delegates to the evolution hook") {
    auto outcomes = resume_checks(display_event(50000000, "jpg"), phr_plan());
    CheckOutcome& violation = outcomes[0];

    std::string requested;
    ActionContext ctx;
    ctx.reconfigure = [&](const std::string& name) {
        requested = name;
        return true;
    };
    ActionEffect effect =
        execute_action(violation, Action{ActionType::Reconfigure, "insert-dataconverter"}, ctx);
    CHECK(requested == "insert-dataconverter");
    CHECK(effect.reconfigure_accepted);
}

TEST_CASE("actions only run on violations") {
    auto outcomes = resume_checks(display_event(1, "txt"), phr_plan());
    ActionContext ctx;
    CHECK_THROWS_AS(execute_action(outcomes[0], Action{ActionType::Notify, ""}, ctx),
                    std::invalid_argument);
}
