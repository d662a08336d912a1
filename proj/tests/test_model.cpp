#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "calico/model.hpp"
#include "helpers.hpp"

using namespace calico;
using namespace calico_tests;

namespace {

bool has_issue(const WellFormednessReport& report, const std::string& fragment) {
    return std::any_of(report.issues.begin(), report.issues.end(), [&](const ValidationIssue& i) {
        return i.message.find(fragment) != std::string::npos;
    });
}

Architecture two_component_arch() {
    Architecture arch;
    arch.name = "A";
    arch.components.push_back(component("S", {port("out1", Direction::Out)}));
    arch.components.push_back(component("T", {port("in1", Direction::In)}));
    arch.connectors.push_back(connector("k1", "S", "out1", "T", "in1"));
    return arch;
}

}  // namespace

TEST_CASE("validate accepts a well-formed model") {
    CHECK(validate(two_component_arch()).ok());
}

TEST_CASE("validate reports a dangling connector endpoint") {
    Architecture arch = two_component_arch();
    arch.connectors.push_back(connector("k2", "S", "out1", "T", "nope"));
    auto report = validate(arch);
    REQUIRE(report.issues.size() == 1);
    CHECK(has_issue(report, "dangling endpoint"));
    CHECK(report.issues[0].location == "connector k2");
}

TEST_CASE("validate reports a connector joining two out ports") {
    Architecture arch;
    arch.name = "A";
    arch.components.push_back(component("S", {port("o1", Direction::Out)}));
    arch.components.push_back(component("T", {port("o2", Direction::Out)}));
    arch.connectors.push_back(connector("k1", "S", "o1", "T", "o2"));
    auto report = validate(arch);
    REQUIRE(report.issues.size() == 1);
    CHECK(has_issue(report, "direction mismatch"));
}

TEST_CASE("validate reports duplicate names") {
    Architecture arch = two_component_arch();
    arch.components.push_back(component("S"));
    CHECK(has_issue(validate(arch), "duplicate component name"));

    Architecture arch2 = two_component_arch();
    arch2.components[0].ports.push_back(port("out1", Direction::Out));
    CHECK(has_issue(validate(arch2), "duplicate port name"));

    Architecture arch3 = two_component_arch();
    arch3.connectors.push_back(arch3.connectors[0]);
    CHECK(has_issue(validate(arch3), "duplicate connector id"));
}

TEST_CASE("validate reports an unbound required port") {
    Architecture arch = two_component_arch();
    arch.components[1].ports.push_back(port("needy", Direction::In, "Doc", true));
    CHECK(has_issue(validate(arch), "required port"));

    // Binding it silences the issue.
    arch.components[0].ports.push_back(port("out2", Direction::Out));
    arch.connectors.push_back(connector("k2", "S", "out2", "T", "needy"));
    CHECK(validate(arch).ok());
}

TEST_CASE("validate checks contract references") {
    Architecture arch = two_component_arch();
    arch.structural.push_back({{"S", "ghost"}, std::nullopt, true});
    CHECK(has_issue(validate(arch), "dangling endpoint"));

    Architecture arch2 = two_component_arch();
    arch2.structural.push_back({{"T", "in1"}, std::set<std::string>{}, false});
    CHECK(has_issue(validate(arch2), "allows no clients"));

    Architecture arch3 = two_component_arch();
    arch3.structural.push_back({{"T", "in1"}, std::set<std::string>{"Ghost"}, false});
    CHECK(has_issue(validate(arch3), "is not a component"));

    Architecture arch4 = two_component_arch();
    arch4.behavioral.push_back({"S", ProcessTerm::make_action("ghost", ActionKind::Send)});
    CHECK(has_issue(validate(arch4), "does not name a port"));

    Architecture arch5 = two_component_arch();
    arch5.dataflow.push_back({{"T", "in1"}, DataFacts{0, 10, std::nullopt}, std::nullopt});
    CHECK(has_issue(validate(arch5), "non-out port"));

    Architecture arch6 = two_component_arch();
    arch6.dataflow.push_back(
        {{"S", "out1"}, std::nullopt, DataConstraints{Bytes{5}, std::nullopt}});
    CHECK(has_issue(validate(arch6), "non-in port"));

    Architecture arch7 = two_component_arch();
    arch7.dataflow.push_back({{"S", "out1"}, DataFacts{20, 10, std::nullopt}, std::nullopt});
    CHECK(has_issue(validate(arch7), "lower bound exceeds upper bound"));
}

TEST_CASE("bundled PHR model validates cleanly") {
    Architecture phr = load_asset_model("phr.adl");
    CHECK(validate(phr).ok());
}

TEST_CASE("canonicalize is idempotent") {
    Architecture phr = load_asset_model("phr.adl");
    Architecture once = canonicalize(phr);
    Architecture twice = canonicalize(once);
    CHECK(once == twice);
}

TEST_CASE("canonicalize is insensitive to declaration order") {
    std::mt19937 rng(7);
    Architecture phr = load_asset_model("phr.adl");
    for (int round = 0; round < 20; ++round) {
        Architecture shuffled = phr;
        std::shuffle(shuffled.components.begin(), shuffled.components.end(), rng);
        std::shuffle(shuffled.connectors.begin(), shuffled.connectors.end(), rng);
        std::shuffle(shuffled.dataflow.begin(), shuffled.dataflow.end(), rng);
        std::shuffle(shuffled.behavioral.begin(), shuffled.behavioral.end(), rng);
        for (auto& c : shuffled.components) std::shuffle(c.ports.begin(), c.ports.end(), rng);
        CHECK(canonicalize(shuffled) == canonicalize(phr));
    }
}

TEST_CASE("canonicalize rejects ill-formed input") {
    Architecture arch = two_component_arch();
    arch.connectors.push_back(connector("k2", "S", "out1", "T", "nope"));
    CHECK_THROWS_AS(canonicalize(arch), std::invalid_argument);
}

TEST_CASE("term comparison and rendering") {
    TermPtr a = ProcessTerm::make_action("a", ActionKind::Send);
    TermPtr b = ProcessTerm::make_action("b", ActionKind::Receive);
    TermPtr seq = ProcessTerm::make_seq(a, ProcessTerm::make_choice(b, ProcessTerm::make_skip()));

    CHECK(compare_terms(*a, *a) == 0);
    CHECK(compare_terms(*a, *b) != 0);
    CHECK(terms_equal(seq, seq));
    CHECK(term_to_string(*seq) == "a! ; b? | skip");

    TermPtr starred = ProcessTerm::make_star(ProcessTerm::make_seq(a, b));
    CHECK(term_to_string(*starred) == "(a! ; b?)*");
}

TEST_CASE("empty validation report implies every endpoint resolves") {
    Architecture phr = canonicalize(load_asset_model("phr.adl"));
    REQUIRE(validate(phr).ok());
    for (const auto& k : phr.connectors) {
        const Port* src = phr.find_port(k.source);
        const Port* dst = phr.find_port(k.target);
        REQUIRE(src != nullptr);
        REQUIRE(dst != nullptr);
        CHECK(src->direction == Direction::Out);
        CHECK(dst->direction == Direction::In);
    }
}
