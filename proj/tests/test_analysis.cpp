#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "calico/analysis.hpp"
#include "generators.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace calico;
using namespace calico_tests;

namespace {

Architecture ticket_arch(bool direct_client_wire) {
    Architecture arch;
    arch.name = "T";
    arch.components.push_back(
        component("Client", {port("q", Direction::Out, "Req"), port("login", Direction::Out, "Req")}));
    arch.components.push_back(component("Authentication", {port("a", Direction::Out, "Req")}));
    arch.components.push_back(component("SessionServer", {port("getTicket", Direction::In, "Req")}));
    arch.connectors.push_back(connector("k_auth", "Authentication", "a", "SessionServer", "getTicket"));
    if (direct_client_wire)
        arch.connectors.push_back(connector("k_client", "Client", "q", "SessionServer", "getTicket"));
    arch.structural.push_back(
        {{"SessionServer", "getTicket"}, std::set<std::string>{"Authentication"}, false});
    return arch;
}

const Verdict* find_verdict(const std::vector<Verdict>& verdicts, const std::string& subject) {
    for (const auto& v : verdicts)
        if (v.subject == subject) return &v;
    return nullptr;
}

TermPtr act(const std::string& port, ActionKind kind) {
    return ProcessTerm::make_action(port, kind);
}

// Two components joined by connectors a and b, with the given protocols.
Architecture two_party(const TermPtr& p_term, const TermPtr& q_term) {
    Architecture arch;
    arch.name = "Two";
    arch.components.push_back(component("P", {port("a", Direction::Out), port("b", Direction::Out)}));
    arch.components.push_back(component("Q", {port("a", Direction::In), port("b", Direction::In)}));
    arch.connectors.push_back(connector("a", "P", "a", "Q", "a"));
    arch.connectors.push_back(connector("b", "P", "b", "Q", "b"));
    arch.behavioral.push_back({"P", p_term});
    arch.behavioral.push_back({"Q", q_term});
    return arch;
}

}  // namespace

// --- structural ------------------------------------------------------------

TEST_CASE("access restriction rejects a caller outside the allowed set") {
    auto verdicts = check_structural(ticket_arch(true));
    const Verdict* bad = find_verdict(verdicts, "k_client");
    REQUIRE(bad != nullptr);
    CHECK(bad->kind == VerdictKind::Incompatible);
    CHECK(bad->reason.find("caller not permitted") != std::string::npos);

    const Verdict* good = find_verdict(verdicts, "k_auth");
    REQUIRE(good != nullptr);
    CHECK(good->kind == VerdictKind::Compatible);
}

TEST_CASE("access restriction accepts the allowed caller") {
    auto verdicts = check_structural(ticket_arch(false));
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].subject == "k_auth");
    CHECK(verdicts[0].kind == VerdictKind::Compatible);
}

TEST_CASE("must_be_bound on an unbound port is incompatible") {
    Architecture arch;
    arch.name = "A";
    arch.components.push_back(component("S", {port("p", Direction::In)}));
    arch.structural.push_back({{"S", "p"}, std::nullopt, true});
    auto verdicts = check_structural(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Incompatible);
    CHECK(verdicts[0].subject == "must_be_bound:S.p");
}

TEST_CASE("connector data type mismatch is incompatible") {
    Architecture arch;
    arch.name = "A";
    arch.components.push_back(component("S", {port("o", Direction::Out, "Doc")}));
    arch.components.push_back(component("T", {port("i", Direction::In, "Image")}));
    arch.connectors.push_back(connector("k", "S", "o", "T", "i"));
    auto verdicts = check_structural(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Incompatible);
    CHECK(verdicts[0].reason.find("type mismatch") != std::string::npos);
}

// --- protocol compilation ----------------------------------------------------

TEST_CASE("sequence compiles to a three-state chain") {
    Architecture arch = two_party(ProcessTerm::make_seq(act("a", ActionKind::Send),
                                                        act("b", ActionKind::Send)),
                                  ProcessTerm::make_skip());
    Lts lts = compile_protocol(arch.behavioral[0].protocol, *arch.find_component("P"), arch);
    CHECK(lts.state_count == 3);
    CHECK(lts.transitions.size() == 2);
    CHECK(lts.finals.size() == 1);
}

TEST_CASE("star compiles to a final initial state with a loop") {
    Architecture arch = two_party(ProcessTerm::make_star(act("a", ActionKind::Send)),
                                  ProcessTerm::make_skip());
    Lts lts = compile_protocol(arch.behavioral[0].protocol, *arch.find_component("P"), arch);
    CHECK(lts.finals.count(lts.initial) == 1);
    CHECK(lts.accepts({}));
    CHECK(lts.accepts({{"a", ActionKind::Send}}));
    CHECK(lts.accepts({{"a", ActionKind::Send}, {"a", ActionKind::Send}}));
    CHECK(!lts.accepts({{"b", ActionKind::Send}}));
}

TEST_CASE("choice followed by action accepts exactly {ac, bc}") {
    TermPtr term = ProcessTerm::make_seq(
        ProcessTerm::make_choice(act("a", ActionKind::Send), act("b", ActionKind::Send)),
        act("c", ActionKind::Send));
    Architecture arch;
    arch.name = "A";
    arch.components.push_back(component("P", {port("a", Direction::Out), port("b", Direction::Out),
                                              port("c", Direction::Out)}));
    arch.components.push_back(component("Q", {port("ia", Direction::In), port("ib", Direction::In),
                                              port("ic", Direction::In)}));
    arch.connectors.push_back(connector("a", "P", "a", "Q", "ia"));
    arch.connectors.push_back(connector("b", "P", "b", "Q", "ib"));
    arch.connectors.push_back(connector("c", "P", "c", "Q", "ic"));
    arch.behavioral.push_back({"P", term});

    Lts lts = compile_protocol(term, *arch.find_component("P"), arch);

    // Enumerate both sides up to length 2 and compare.
    auto expected = term_language(term, 2);
    std::set<std::vector<std::pair<std::string, ActionKind>>> expected_relabeled;
    for (const auto& word : expected) expected_relabeled.insert(word);  // ports == connector ids here

    std::vector<std::string> alphabet = {"a", "b", "c"};
    std::set<std::vector<std::pair<std::string, ActionKind>>> accepted;
    for (const auto& x : alphabet)
        for (const auto& y : alphabet) {
            std::vector<std::pair<std::string, ActionKind>> word = {{x, ActionKind::Send},
                                                                    {y, ActionKind::Send}};
            if (lts.accepts(word)) accepted.insert(word);
            std::vector<std::pair<std::string, ActionKind>> single = {{x, ActionKind::Send}};
            if (lts.accepts(single)) accepted.insert(single);
        }
    if (lts.accepts({})) accepted.insert({});

    CHECK(accepted == expected_relabeled);
    CHECK(accepted.size() == 2);  // exactly ac and bc
}

TEST_CASE("protocol language equals term language on random terms") {
    Rng rng(99);
    for (int round = 0; round < 120; ++round) {
        Architecture arch = random_protocol_system(rng, 4);
        for (const auto& bc : arch.behavioral) {
            const Component* c = arch.find_component(bc.component);
            Lts lts = compile_protocol(bc.protocol, *c, arch);

            // Every port here is bound by exactly one connector, so the
            // relabeling from ports to connector ids is a bijection.
            std::map<std::string, std::string> port_to_connector;
            for (const auto& k : arch.connectors) {
                if (k.source.component == bc.component)
                    port_to_connector[k.source.port] = k.id;
                if (k.target.component == bc.component)
                    port_to_connector[k.target.port] = k.id;
            }
            auto words = term_language(bc.protocol, 3);
            for (auto word : words) {
                for (auto& [label, kind] : word) label = port_to_connector.at(label);
                CAPTURE(term_to_string(*bc.protocol));
                CHECK(lts.accepts(word));
            }
        }
    }
}

TEST_CASE("an action on an unbound port is an analysis error") {
    Architecture arch;
    arch.name = "A";
    arch.components.push_back(component("P", {port("a", Direction::Out)}));
    arch.behavioral.push_back({"P", act("a", ActionKind::Send)});
    CHECK_THROWS_AS(
        compile_protocol(arch.behavioral[0].protocol, *arch.find_component("P"), arch),
        AnalysisError);
}

// --- behavioral product -------------------------------------------------------

TEST_CASE("crossed send order deadlocks in the initial state") {
    Architecture arch = two_party(
        ProcessTerm::make_seq(act("a", ActionKind::Send), act("b", ActionKind::Send)),
        ProcessTerm::make_seq(act("b", ActionKind::Receive), act("a", ActionKind::Receive)));
    Verdict v = check_behavioral(arch);
    CHECK(v.kind == VerdictKind::Incompatible);
    CHECK(v.reason.find("deadlock") != std::string::npos);
    CHECK(product_has_deadlock(arch));  // oracle agrees
}

TEST_CASE("matching send order is compatible") {
    Architecture arch = two_party(
        ProcessTerm::make_seq(act("a", ActionKind::Send), act("b", ActionKind::Send)),
        ProcessTerm::make_seq(act("a", ActionKind::Receive), act("b", ActionKind::Receive)));
    Verdict v = check_behavioral(arch);
    CHECK(v.kind == VerdictKind::Compatible);
    CHECK(!product_has_deadlock(arch));
}

TEST_CASE("no behavioral contracts means compatible") {
    Architecture arch;
    arch.name = "A";
    CHECK(check_behavioral(arch).kind == VerdictKind::Compatible);
}

TEST_CASE("the state-space cap raises an analysis error") {
    Architecture arch = two_party(
        ProcessTerm::make_star(ProcessTerm::make_choice(act("a", ActionKind::Send),
                                                        act("b", ActionKind::Send))),
        ProcessTerm::make_star(ProcessTerm::make_choice(act("a", ActionKind::Receive),
                                                        act("b", ActionKind::Receive))));
    AnalysisOptions tiny;
    tiny.state_space_cap = 0;
    CHECK_THROWS_AS(check_behavioral(arch, tiny), AnalysisError);
}

TEST_CASE("behavioral verdict matches the term-product oracle on random systems") {
    Rng rng(4242);
    int deadlocks = 0;
    for (int round = 0; round < 80; ++round) {
        Architecture arch = random_protocol_system(rng);
        const bool oracle = product_has_deadlock(arch);
        Verdict v = check_behavioral(arch);
        CAPTURE(round);
        CHECK((v.kind == VerdictKind::Incompatible) == oracle);
        if (oracle) ++deadlocks;
    }
    CHECK(deadlocks > 0);  // the generator must exercise both outcomes
}

// --- dataflow -------------------------------------------------------------------

namespace {

std::vector<Verdict> dataflow_pair(DataFacts facts, DataConstraints constraints) {
    DataflowCase c{std::move(facts), std::move(constraints)};
    return check_dataflow(dataflow_pair_architecture(c));
}

}  // namespace

TEST_CASE("oversized and oddly typed production is partially compatible") {
    auto verdicts = dataflow_pair(
        {1000000, Bytes{5000000000}, std::set<std::string>{"txt", "jpg", "dicom"}},
        {Bytes{10000000}, std::set<std::string>{"txt", "jpg"}});
    REQUIRE(verdicts.size() == 1);
    const Verdict& v = verdicts[0];
    CHECK(v.kind == VerdictKind::PartiallyCompatible);
    REQUIRE(v.residuals.size() == 2);
    CHECK(v.residuals[0].variable == Variable::Size);
    CHECK(v.residuals[0].bound == Bytes{10000000});
    CHECK(v.residuals[1].variable == Variable::Type);
    CHECK(v.residuals[1].allowed == std::set<std::string>{"txt", "jpg"});
}

TEST_CASE("production within the constraints is compatible") {
    auto verdicts = dataflow_pair({0, Bytes{5000000}, std::set<std::string>{"txt"}},
                                  {Bytes{10000000}, std::set<std::string>{"txt", "jpg"}});
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Compatible);
}

TEST_CASE("an empty size intersection is incompatible") {
    auto verdicts = dataflow_pair({20000000, Bytes{50000000}, std::set<std::string>{"txt"}},
                                  {Bytes{10000000}, std::nullopt});
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Incompatible);
}

TEST_CASE("top facts against a finite constraint are partially compatible") {
    auto verdicts = dataflow_pair({0, std::nullopt, std::nullopt},
                                  {Bytes{10000000}, std::set<std::string>{"txt"}});
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::PartiallyCompatible);
    CHECK(verdicts[0].residuals.size() == 2);
}

TEST_CASE("facts propagate through undeclared components by joining inputs") {
    Architecture arch;
    arch.name = "Chain";
    arch.components.push_back(component("Src", {port("o", Direction::Out)}));
    arch.components.push_back(
        component("Mid", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(component("Dst", {port("i", Direction::In)}));
    arch.connectors.push_back(connector("k1", "Src", "o", "Mid", "i"));
    arch.connectors.push_back(connector("k2", "Mid", "o", "Dst", "i"));
    arch.dataflow.push_back(
        {{"Src", "o"}, DataFacts{100, Bytes{200}, std::set<std::string>{"txt"}}, std::nullopt});
    arch.dataflow.push_back(
        {{"Dst", "i"}, std::nullopt, DataConstraints{Bytes{300}, std::set<std::string>{"txt"}}});

    auto verdicts = check_dataflow(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].subject == "k2");
    CHECK(verdicts[0].kind == VerdictKind::Compatible);
}

TEST_CASE("an undeclared source component produces top facts") {
    Architecture arch;
    arch.name = "Chain";
    arch.components.push_back(component("Src", {port("o", Direction::Out)}));
    arch.components.push_back(component("Dst", {port("i", Direction::In)}));
    arch.connectors.push_back(connector("k", "Src", "o", "Dst", "i"));
    arch.dataflow.push_back(
        {{"Dst", "i"}, std::nullopt, DataConstraints{Bytes{300}, std::nullopt}});
    auto verdicts = check_dataflow(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::PartiallyCompatible);
}

TEST_CASE("a component with unbound in ports still counts as a top source") {
    // Nothing is wired into Mid, so nothing restricts what it might emit.
    Architecture arch;
    arch.name = "Quiet";
    arch.components.push_back(
        component("Mid", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(component("Dst", {port("i", Direction::In)}));
    arch.connectors.push_back(connector("k", "Mid", "o", "Dst", "i"));
    arch.dataflow.push_back({{"Dst", "i"}, std::nullopt, DataConstraints{Bytes{1}, std::nullopt}});
    auto verdicts = check_dataflow(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::PartiallyCompatible);
}

TEST_CASE("a consumer fed only by a sourceless cycle is vacuously compatible") {
    Architecture arch;
    arch.name = "Quiet";
    arch.components.push_back(
        component("A", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(
        component("B", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(component("Dst", {port("i", Direction::In)}));
    arch.connectors.push_back(connector("k1", "A", "o", "B", "i"));
    arch.connectors.push_back(connector("k2", "B", "o", "A", "i"));
    arch.connectors.push_back(connector("k3", "B", "o", "Dst", "i"));
    arch.dataflow.push_back({{"Dst", "i"}, std::nullopt, DataConstraints{Bytes{1}, std::nullopt}});
    auto verdicts = check_dataflow(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Compatible);
}

TEST_CASE("dataflow propagation reaches a fixpoint on cycles") {
    Architecture arch;
    arch.name = "Loop";
    arch.components.push_back(
        component("A", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(
        component("B", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(component("Src", {port("o", Direction::Out)}));
    arch.components.push_back(component("Dst", {port("i", Direction::In)}));
    arch.connectors.push_back(connector("k1", "A", "o", "B", "i"));
    arch.connectors.push_back(connector("k2", "B", "o", "A", "i"));
    arch.connectors.push_back(connector("k3", "Src", "o", "A", "i"));
    arch.connectors.push_back(connector("k4", "B", "o", "Dst", "i"));
    arch.dataflow.push_back(
        {{"Src", "o"}, DataFacts{10, Bytes{20}, std::set<std::string>{"txt"}}, std::nullopt});
    arch.dataflow.push_back(
        {{"Dst", "i"}, std::nullopt, DataConstraints{Bytes{50}, std::set<std::string>{"txt"}}});
    auto verdicts = check_dataflow(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Compatible);
}

TEST_CASE("duplicate dataflow declarations merge: produces join, constraints tighten") {
    DataflowCase base = {{5, Bytes{10}, std::set<std::string>{"txt"}},
                         {Bytes{8}, std::set<std::string>{"txt", "jpg"}}};
    Architecture arch = dataflow_pair_architecture(base);
    // A second produces declaration widens the interval and type set.
    arch.dataflow.push_back(
        {{"Producer", "out"}, DataFacts{2, Bytes{20}, std::set<std::string>{"jpg"}}, std::nullopt});
    // A second constraint tightens the allowed types.
    arch.dataflow.push_back(
        {{"Consumer", "in"}, std::nullopt,
         DataConstraints{std::nullopt, std::set<std::string>{"jpg", "png"}}});

    auto verdicts = check_dataflow(arch);
    REQUIRE(verdicts.size() == 1);
    REQUIRE(verdicts[0].kind == VerdictKind::PartiallyCompatible);
    // Effective facts [2,20]/{txt,jpg} vs max 8 / {jpg}: both dimensions partial.
    REQUIRE(verdicts[0].residuals.size() == 2);
    CHECK(verdicts[0].residuals[0].bound == Bytes{8});
    CHECK(verdicts[0].residuals[1].allowed == std::set<std::string>{"jpg"});
}

TEST_CASE("duplicate behavioral or qos contracts on one subject are analysis errors") {
    Architecture arch = two_party(act("a", ActionKind::Send), act("a", ActionKind::Receive));
    arch.behavioral.push_back({"P", act("b", ActionKind::Send)});
    CHECK_THROWS_AS(check_behavioral(arch), AnalysisError);

    Architecture qarch;
    qarch.name = "Q";
    qarch.components.push_back(component("A", {port("o", Direction::Out)}));
    qarch.qos.push_back({{"A", "o"}, OfferedLatency{Millis{5}}, std::nullopt});
    qarch.qos.push_back({{"A", "o"}, OfferedLatency{Millis{9}}, std::nullopt});
    CHECK_THROWS_AS(check_qos(qarch), AnalysisError);
}

TEST_CASE("dataflow trichotomy matches exhaustive enumeration") {
    Rng rng(515151);
    for (int round = 0; round < 150; ++round) {
        DataflowCase c = random_dataflow_case(rng);
        auto verdicts = check_dataflow(dataflow_pair_architecture(c));
        REQUIRE(verdicts.size() == 1);
        CAPTURE(round);
        CHECK(verdicts[0].kind == enumerate_dataflow_verdict(c.facts, c.constraints));
    }
}

TEST_CASE("a compatible verdict survives shrinking the produced interval") {
    Rng rng(616161);
    int compatible_seen = 0;
    for (int round = 0; round < 300; ++round) {
        DataflowCase c = random_dataflow_case(rng);
        auto base = check_dataflow(dataflow_pair_architecture(c));
        if (base[0].kind != VerdictKind::Compatible) continue;
        ++compatible_seen;

        DataflowCase shrunk = c;
        const Bytes lo = shrunk.facts.size_lo;
        const Bytes hi = *shrunk.facts.size_hi;
        shrunk.facts.size_lo = lo + (hi - lo) / 3;
        shrunk.facts.size_hi = hi - (hi - lo) / 3;
        auto tighter = check_dataflow(dataflow_pair_architecture(shrunk));
        CHECK(tighter[0].kind == VerdictKind::Compatible);
    }
    CHECK(compatible_seen > 10);
}

// --- QoS -----------------------------------------------------------------------

namespace {

Architecture qos_chain(std::optional<Millis> first_hop, Millis second_hop, Millis required) {
    Architecture arch;
    arch.name = "Q";
    arch.components.push_back(component("A", {port("o", Direction::Out)}));
    arch.components.push_back(
        component("B", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(component("C", {port("i", Direction::In)}));
    arch.connectors.push_back(connector("k1", "A", "o", "B", "i"));
    arch.connectors.push_back(connector("k2", "B", "o", "C", "i"));
    arch.qos.push_back({{"A", "o"}, OfferedLatency{first_hop}, std::nullopt});
    arch.qos.push_back({{"B", "o"}, OfferedLatency{second_hop}, std::nullopt});
    arch.qos.push_back({{"C", "i"}, std::nullopt, required});
    return arch;
}

}  // namespace

TEST_CASE("latency sums along a chain") {
    auto verdicts = check_qos(qos_chain(Millis{10}, 20, 50));
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Compatible);
}

TEST_CASE("a chain exceeding the requirement is incompatible") {
    auto verdicts = check_qos(qos_chain(Millis{10}, 20, 25));
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Incompatible);
}

TEST_CASE("an unknown hop leaves a latency residual") {
    auto verdicts = check_qos(qos_chain(std::nullopt, 20, 50));
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::PartiallyCompatible);
    REQUIRE(verdicts[0].residuals.size() == 1);
    CHECK(verdicts[0].residuals[0].variable == Variable::Latency);
    CHECK(verdicts[0].residuals[0].bound == Bytes{50});
    CHECK(verdicts[0].residuals[0].connector == "k2");
}

TEST_CASE("converging paths take the slowest branch") {
    Architecture arch;
    arch.name = "Y";
    arch.components.push_back(component("A", {port("o", Direction::Out)}));
    arch.components.push_back(component("B", {port("o", Direction::Out)}));
    arch.components.push_back(component("C", {port("i1", Direction::In), port("i2", Direction::In)}));
    arch.connectors.push_back(connector("k1", "A", "o", "C", "i1"));
    arch.connectors.push_back(connector("k2", "B", "o", "C", "i2"));
    arch.qos.push_back({{"A", "o"}, OfferedLatency{Millis{40}}, std::nullopt});
    arch.qos.push_back({{"B", "o"}, OfferedLatency{Millis{10}}, std::nullopt});
    arch.qos.push_back({{"C", "i1"}, std::nullopt, Millis{30}});

    // i1 is only fed by A (40ms) which exceeds 30ms.
    auto verdicts = check_qos(arch);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].kind == VerdictKind::Incompatible);
}

TEST_CASE("a cycle through qos-annotated ports is an analysis error") {
    Architecture arch;
    arch.name = "Cycle";
    arch.components.push_back(
        component("A", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.components.push_back(
        component("B", {port("i", Direction::In), port("o", Direction::Out)}));
    arch.connectors.push_back(connector("k1", "A", "o", "B", "i"));
    arch.connectors.push_back(connector("k2", "B", "o", "A", "i"));
    arch.qos.push_back({{"A", "o"}, OfferedLatency{Millis{5}}, std::nullopt});
    arch.qos.push_back({{"B", "o"}, OfferedLatency{Millis{5}}, Millis{100}});
    CHECK_THROWS_AS(check_qos(arch), AnalysisError);
}

// --- analyze --------------------------------------------------------------------

TEST_CASE("PHR analysis passes the gate with exactly one partial verdict") {
    Architecture phr = load_asset_model("phr.adl");
    AnalysisReport report = analyze(phr);
    CHECK(report.gate_passed);
    std::vector<const Verdict*> partial;
    for (const auto& v : report.verdicts)
        if (v.kind == VerdictKind::PartiallyCompatible) partial.push_back(&v);
    REQUIRE(partial.size() == 1);
    CHECK(partial[0]->subject == "c_display");
    const Connector* k = phr.find_connector("c_display");
    REQUIRE(k != nullptr);
    CHECK(k->source.component == "GlobalSearch");
    CHECK(k->target.component == "PDA");
}

TEST_CASE("wiring the client straight to getTicket fails the gate") {
    Architecture bad = load_asset_model("phr-bad-auth.adl");
    AnalysisReport report = analyze(bad);
    CHECK(!report.gate_passed);
    int incompatible = 0;
    for (const auto& v : report.verdicts)
        if (v.kind == VerdictKind::Incompatible) {
            ++incompatible;
            CHECK(v.subject == "c_direct");
        }
    CHECK(incompatible == 1);
}

TEST_CASE("an empty architecture passes with zero verdicts") {
    Architecture arch;
    arch.name = "Empty";
    AnalysisReport report = analyze(arch);
    CHECK(report.gate_passed);
    CHECK(report.verdicts.empty());
}

TEST_CASE("analyze is a pure function of the canonical model") {
    const std::string text = read_file(assets_dir() / "phr" / "phr.adl");
    AnalysisReport a = analyze(*parse(text).architecture);
    AnalysisReport b = analyze(*parse(text).architecture);
    CHECK(a.to_json() == b.to_json());

    // Equal canonical models yield equal reports: the same model with its
    // declarations reshuffled analyzes identically.
    Rng rng(2);
    Architecture shuffled = *parse(text).architecture;
    std::shuffle(shuffled.components.begin(), shuffled.components.end(), rng);
    std::shuffle(shuffled.connectors.begin(), shuffled.connectors.end(), rng);
    std::shuffle(shuffled.dataflow.begin(), shuffled.dataflow.end(), rng);
    AnalysisReport c = analyze(*parse(serialize(shuffled)).architecture);
    CHECK(a.to_json() == c.to_json());
}

TEST_CASE("verdicts carry exactly the payload of their kind") {
    for (const auto& model : {"phr.adl", "phr-bad-auth.adl", "phr-with-converter.adl"}) {
        AnalysisReport report = analyze(load_asset_model(model));
        for (const auto& v : report.verdicts) {
            CHECK((v.kind == VerdictKind::Incompatible) == !v.reason.empty());
            CHECK((v.kind == VerdictKind::PartiallyCompatible) == !v.residuals.empty());
        }
    }
}

TEST_CASE("the report serializes to the documented JSON shape") {
    AnalysisReport report = analyze(load_asset_model("phr.adl"));
    auto j = nlohmann::json::parse(report.to_json());
    CHECK(j.at("gate").get<bool>());
    REQUIRE(j.contains("verdicts"));
    bool saw_residuals = false;
    for (const auto& v : j["verdicts"]) {
        CHECK(v.contains("subject"));
        CHECK(v.contains("kind"));
        if (v.contains("residuals")) {
            saw_residuals = true;
            for (const auto& r : v["residuals"]) {
                CHECK(r.contains("connector"));
                CHECK(r.contains("variable"));
                CHECK(r.contains("test"));
                CHECK(r.contains("bound"));
            }
        }
    }
    CHECK(saw_residuals);
}
