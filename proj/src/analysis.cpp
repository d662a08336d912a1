#include "calico/analysis.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "calico/adl.hpp"

namespace calico {

using nlohmann::json;

std::string to_string(AnalysisKind k) {
    switch (k) {
        case AnalysisKind::Structural: return "structural";
        case AnalysisKind::Behavioral: return "behavioral";
        case AnalysisKind::Dataflow: return "dataflow";
        case AnalysisKind::Qos: return "qos";
    }
    return "?";
}

std::string to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Compatible: return "Compatible";
        case VerdictKind::Incompatible: return "Incompatible";
        case VerdictKind::PartiallyCompatible: return "PartiallyCompatible";
    }
    return "?";
}

std::string to_string(Variable v) {
    switch (v) {
        case Variable::Size: return "Size";
        case Variable::Type: return "Type";
        case Variable::Latency: return "Latency";
    }
    return "?";
}

std::string ResidualPredicate::describe() const {
    std::ostringstream os;
    if (variable == Variable::Type) {
        os << "Type in {";
        bool first = true;
        for (const auto& t : allowed) {
            if (!first) os << ", ";
            os << t;
            first = false;
        }
        os << "}";
    } else {
        os << to_string(variable) << " <= " << bound
           << (variable == Variable::Latency ? "ms" : "");
    }
    return os.str();
}

bool Lts::accepts(const std::vector<std::pair<std::string, ActionKind>>& word) const {
    std::set<int> current = {initial};
    for (const auto& [connector, kind] : word) {
        std::set<int> next;
        for (const auto& t : transitions)
            if (current.count(t.from) && t.connector == connector && t.kind == kind)
                next.insert(t.to);
        current = std::move(next);
        if (current.empty()) return false;
    }
    for (int s : current)
        if (finals.count(s)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Structural analysis
// ---------------------------------------------------------------------------

std::vector<Verdict> check_structural(const Architecture& arch) {
    std::vector<Verdict> verdicts;

    for (const auto& k : arch.connectors) {
        const Port* src = arch.find_port(k.source);
        const Port* dst = arch.find_port(k.target);
        if (src && dst && src->data_type != dst->data_type) {
            Verdict v;
            v.analysis = AnalysisKind::Structural;
            v.subject = k.id;
            v.kind = VerdictKind::Incompatible;
            v.reason = "type mismatch: " + to_string(k.source) + " carries " + src->data_type +
                       " but " + to_string(k.target) + " expects " + dst->data_type;
            verdicts.push_back(std::move(v));
        }
    }

    for (const auto& sc : arch.structural) {
        if (sc.allowed_clients) {
            for (const Connector* k : arch.connectors_at(sc.subject)) {
                // The peer is whichever side of the connector is not the
                // restricted port.
                const std::string& peer =
                    k->target == sc.subject ? k->source.component : k->target.component;
                Verdict v;
                v.analysis = AnalysisKind::Structural;
                v.subject = k->id;
                if (sc.allowed_clients->count(peer)) {
                    v.kind = VerdictKind::Compatible;
                } else {
                    v.kind = VerdictKind::Incompatible;
                    v.reason = "caller not permitted: " + peer + " may not use " +
                               to_string(sc.subject);
                }
                verdicts.push_back(std::move(v));
            }
        }
        if (sc.must_be_bound) {
            Verdict v;
            v.analysis = AnalysisKind::Structural;
            v.subject = "must_be_bound:" + to_string(sc.subject);
            if (arch.port_bound(sc.subject)) {
                v.kind = VerdictKind::Compatible;
            } else {
                v.kind = VerdictKind::Incompatible;
                v.reason = "port " + to_string(sc.subject) +
                           " must be bound but no connector reaches it";
            }
            verdicts.push_back(std::move(v));
        }
    }

    std::stable_sort(verdicts.begin(), verdicts.end(),
                     [](const Verdict& a, const Verdict& b) { return a.subject < b.subject; });
    return verdicts;
}

// ---------------------------------------------------------------------------
// Behavioral analysis
// ---------------------------------------------------------------------------

namespace {

struct NfaBuilder {
    struct Edge {
        bool epsilon = true;
        std::string connector;
        ActionKind kind = ActionKind::Send;
        int to = 0;
    };

    std::vector<std::vector<Edge>> adjacency;

    int new_state() {
        adjacency.emplace_back();
        return static_cast<int>(adjacency.size()) - 1;
    }

    void add_epsilon(int from, int to) { adjacency[from].push_back({true, "", ActionKind::Send, to}); }

    void add_labeled(int from, const std::string& connector, ActionKind kind, int to) {
        adjacency[from].push_back({false, connector, kind, to});
    }
};

struct Fragment {
    int start = 0;
    std::set<int> finals;
};

Fragment build_fragment(const ProcessTerm& term, const Component& component,
                        const Architecture& arch, NfaBuilder& nfa) {
    switch (term.kind) {
        case ProcessTerm::Kind::Skip: {
            int s = nfa.new_state();
            return {s, {s}};
        }
        case ProcessTerm::Kind::Action: {
            const Port* port = component.find_port(term.port);
            if (!port)
                throw AnalysisError("protocol of " + component.name + " names unknown port \"" +
                                    term.port + "\"");
            const Endpoint endpoint{component.name, term.port};
            const bool is_send = term.action == ActionKind::Send;
            if (is_send && port->direction != Direction::Out)
                throw AnalysisError("protocol of " + component.name + " sends on in port \"" +
                                    term.port + "\"");
            if (!is_send && port->direction != Direction::In)
                throw AnalysisError("protocol of " + component.name + " receives on out port \"" +
                                    term.port + "\"");
            const auto bound =
                is_send ? arch.connectors_from(endpoint) : arch.connectors_targeting(endpoint);
            if (bound.empty())
                throw AnalysisError("protocol of " + component.name + " uses unbound port \"" +
                                    term.port + "\"");
            int s0 = nfa.new_state();
            int s1 = nfa.new_state();
            // A port bound by several connectors compiles to one labeled
            // transition per connector: the action may take any of them.
            for (const Connector* k : bound) nfa.add_labeled(s0, k->id, term.action, s1);
            return {s0, {s1}};
        }
        case ProcessTerm::Kind::Seq: {
            Fragment left = build_fragment(*term.left, component, arch, nfa);
            Fragment right = build_fragment(*term.right, component, arch, nfa);
            for (int f : left.finals) nfa.add_epsilon(f, right.start);
            return {left.start, right.finals};
        }
        case ProcessTerm::Kind::Choice: {
            Fragment left = build_fragment(*term.left, component, arch, nfa);
            Fragment right = build_fragment(*term.right, component, arch, nfa);
            int s = nfa.new_state();
            nfa.add_epsilon(s, left.start);
            nfa.add_epsilon(s, right.start);
            std::set<int> finals = left.finals;
            finals.insert(right.finals.begin(), right.finals.end());
            return {s, finals};
        }
        case ProcessTerm::Kind::Star: {
            Fragment inner = build_fragment(*term.left, component, arch, nfa);
            int s = nfa.new_state();
            nfa.add_epsilon(s, inner.start);
            for (int f : inner.finals) nfa.add_epsilon(f, s);
            return {s, {s}};
        }
    }
    throw AnalysisError("malformed protocol term");
}

}  // namespace

Lts compile_protocol(const TermPtr& term, const Component& component, const Architecture& arch) {
    if (!term) throw AnalysisError("missing protocol term for " + component.name);

    NfaBuilder nfa;
    Fragment frag = build_fragment(*term, component, arch, nfa);

    const int n = static_cast<int>(nfa.adjacency.size());

    // Epsilon closures.
    std::vector<std::set<int>> closure(n);
    for (int s = 0; s < n; ++s) {
        std::deque<int> queue = {s};
        closure[s].insert(s);
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (const auto& e : nfa.adjacency[u])
                if (e.epsilon && closure[s].insert(e.to).second) queue.push_back(e.to);
        }
    }

    // Labeled transitions after closure, and closure-derived finals.
    using Label = std::tuple<std::string, ActionKind, int>;
    std::vector<std::set<Label>> labeled(n);
    std::vector<bool> is_final(n, false);
    for (int s = 0; s < n; ++s) {
        for (int u : closure[s]) {
            if (frag.finals.count(u)) is_final[s] = true;
            for (const auto& e : nfa.adjacency[u])
                if (!e.epsilon) labeled[s].insert({e.connector, e.kind, e.to});
        }
    }

    // Keep states reachable from the start, renumbered in BFS order.
    std::map<int, int> renumber;
    std::vector<int> order;
    std::deque<int> queue = {frag.start};
    renumber[frag.start] = 0;
    order.push_back(frag.start);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (const auto& [connector, kind, to] : labeled[u]) {
            (void)connector;
            (void)kind;
            if (!renumber.count(to)) {
                renumber[to] = static_cast<int>(order.size());
                order.push_back(to);
                queue.push_back(to);
            }
        }
    }

    Lts lts;
    lts.state_count = static_cast<int>(order.size());
    lts.initial = 0;
    for (int old_state : order) {
        int s = renumber[old_state];
        if (is_final[old_state]) lts.finals.insert(s);
        for (const auto& [connector, kind, to] : labeled[old_state])
            lts.transitions.push_back({s, connector, kind, renumber[to]});
    }
    std::sort(lts.transitions.begin(), lts.transitions.end(),
              [](const Lts::Transition& a, const Lts::Transition& b) {
                  return std::tie(a.from, a.connector, a.kind, a.to) <
                         std::tie(b.from, b.connector, b.kind, b.to);
              });
    return lts;
}

namespace {

struct VectorHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = v.size();
        for (int x : v) h = h * 1000003 + static_cast<std::size_t>(x) + 0x9e3779b9;
        return h;
    }
};

}  // namespace

Verdict check_behavioral(const Architecture& arch, const AnalysisOptions& options) {
    Verdict verdict;
    verdict.analysis = AnalysisKind::Behavioral;
    verdict.subject = "behavioral";
    verdict.kind = VerdictKind::Compatible;

    if (arch.behavioral.empty()) return verdict;

    // Participants in component-name order; components without contracts
    // stay out of the product and impose nothing.
    std::vector<const BehavioralContract*> contracts;
    std::set<std::string> seen;
    for (const auto& bc : arch.behavioral) {
        if (!seen.insert(bc.component).second)
            throw AnalysisError("multiple behavioral contracts on component " + bc.component);
        contracts.push_back(&bc);
    }
    std::sort(contracts.begin(), contracts.end(),
              [](const BehavioralContract* a, const BehavioralContract* b) {
                  return a->component < b->component;
              });

    const int n = static_cast<int>(contracts.size());
    std::vector<Lts> ltss(n);
    std::map<std::string, int> participant_index;
    for (int i = 0; i < n; ++i) {
        const Component* component = arch.find_component(contracts[i]->component);
        ltss[i] = compile_protocol(contracts[i]->protocol, *component, arch);
        participant_index[contracts[i]->component] = i;
    }

    // For each connector: which participants own its send and receive side.
    struct ConnectorRole {
        int sender = -1;
        int receiver = -1;
    };
    std::map<std::string, ConnectorRole> roles;
    for (const auto& k : arch.connectors) {
        ConnectorRole role;
        auto s = participant_index.find(k.source.component);
        auto r = participant_index.find(k.target.component);
        if (s != participant_index.end()) role.sender = s->second;
        if (r != participant_index.end()) role.receiver = r->second;
        if (role.sender >= 0 && role.sender == role.receiver)
            throw AnalysisError("self-connector " + k.id +
                                " on a component with a behavioral contract is not supported");
        roles[k.id] = role;
    }

    // Per participant and state: transitions grouped by (connector, kind).
    using Key = std::pair<std::string, ActionKind>;
    std::vector<std::vector<std::map<Key, std::vector<int>>>> moves(n);
    for (int i = 0; i < n; ++i) {
        moves[i].resize(static_cast<std::size_t>(ltss[i].state_count));
        for (const auto& t : ltss[i].transitions)
            moves[i][static_cast<std::size_t>(t.from)][{t.connector, t.kind}].push_back(t.to);
    }

    auto successors = [&](const std::vector<int>& state, std::vector<std::vector<int>>& out) {
        out.clear();
        for (int i = 0; i < n; ++i) {
            for (const auto& [key, targets] : moves[i][static_cast<std::size_t>(state[i])]) {
                const auto& [connector, kind] = key;
                const ConnectorRole& role = roles.at(connector);
                if (kind == ActionKind::Send && role.receiver >= 0) {
                    // Rendezvous: the receiving participant must be ready.
                    const int j = role.receiver;
                    auto it = moves[j][static_cast<std::size_t>(state[j])].find(
                        {connector, ActionKind::Receive});
                    if (it == moves[j][static_cast<std::size_t>(state[j])].end()) continue;
                    for (int to_i : targets)
                        for (int to_j : it->second) {
                            std::vector<int> next = state;
                            next[i] = to_i;
                            next[j] = to_j;
                            out.push_back(std::move(next));
                        }
                } else if (kind == ActionKind::Receive && role.sender >= 0) {
                    // Counted when the sending side proposes the rendezvous.
                    continue;
                } else {
                    // The peer is uncontracted: the step is free.
                    for (int to_i : targets) {
                        std::vector<int> next = state;
                        next[i] = to_i;
                        out.push_back(std::move(next));
                    }
                }
            }
        }
    };

    std::vector<int> initial(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) initial[static_cast<std::size_t>(i)] = ltss[i].initial;

    std::unordered_set<std::vector<int>, VectorHash> visited;
    std::deque<std::vector<int>> queue;
    visited.insert(initial);
    queue.push_back(initial);

    std::vector<std::vector<int>> next_states;
    while (!queue.empty()) {
        std::vector<int> state = queue.front();
        queue.pop_front();

        successors(state, next_states);
        if (next_states.empty()) {
            bool all_final = true;
            for (int i = 0; i < n; ++i)
                if (!ltss[i].finals.count(state[static_cast<std::size_t>(i)])) all_final = false;
            if (!all_final) {
                std::ostringstream os;
                os << "deadlock: ";
                for (int i = 0; i < n; ++i) {
                    if (i) os << ", ";
                    os << contracts[static_cast<std::size_t>(i)]->component << "@"
                       << state[static_cast<std::size_t>(i)];
                }
                verdict.kind = VerdictKind::Incompatible;
                verdict.reason = os.str();
                return verdict;
            }
        }
        for (auto& next : next_states) {
            if (visited.count(next)) continue;
            if (visited.size() >= options.state_space_cap)
                throw AnalysisError("state-space cap exceeded (" +
                                    std::to_string(options.state_space_cap) + " product states)");
            visited.insert(next);
            queue.push_back(std::move(next));
        }
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Dataflow analysis
// ---------------------------------------------------------------------------

namespace {

// Lattice element for one out port: bottom (no data), or an interval plus a
// type set where a missing bound / set means Top.
struct Fact {
    bool bottom = true;
    Bytes lo = 0;
    std::optional<Bytes> hi;
    std::optional<std::set<std::string>> types;

    static Fact top() { return {false, 0, std::nullopt, std::nullopt}; }

    static Fact from(const DataFacts& f) { return {false, f.size_lo, f.size_hi, f.types}; }

    friend bool operator==(const Fact&, const Fact&) = default;
};

Fact join(const Fact& a, const Fact& b) {
    if (a.bottom) return b;
    if (b.bottom) return a;
    Fact out;
    out.bottom = false;
    out.lo = std::min(a.lo, b.lo);
    if (a.hi && b.hi) out.hi = std::max(*a.hi, *b.hi);
    if (a.types && b.types) {
        std::set<std::string> merged = *a.types;
        merged.insert(b.types->begin(), b.types->end());
        out.types = std::move(merged);
    }
    return out;
}

}  // namespace

std::vector<Verdict> check_dataflow(const Architecture& arch) {
    // Declared production facts, joined when a port is declared twice.
    std::map<Endpoint, Fact> declared;
    for (const auto& dc : arch.dataflow) {
        if (!dc.produced) continue;
        Fact f = Fact::from(*dc.produced);
        auto [it, inserted] = declared.emplace(dc.port, f);
        if (!inserted) it->second = join(it->second, f);
    }

    // Effective constraints per in port, tightened when declared twice.
    std::map<Endpoint, DataConstraints> constraints;
    for (const auto& dc : arch.dataflow) {
        if (!dc.constraints) continue;
        auto [it, inserted] = constraints.emplace(dc.port, *dc.constraints);
        if (inserted) continue;
        DataConstraints& merged = it->second;
        if (dc.constraints->max_size)
            merged.max_size = merged.max_size ? std::min(*merged.max_size, *dc.constraints->max_size)
                                              : dc.constraints->max_size;
        if (dc.constraints->allowed_types) {
            if (!merged.allowed_types) {
                merged.allowed_types = dc.constraints->allowed_types;
            } else {
                std::set<std::string> intersection;
                for (const auto& t : *merged.allowed_types)
                    if (dc.constraints->allowed_types->count(t)) intersection.insert(t);
                merged.allowed_types = std::move(intersection);
            }
        }
    }

    // Facts per out port. Undeclared ports of components with at least one
    // inbound connector forward the join of their inputs; undeclared ports
    // of source components are Top (nothing restricts what they emit).
    std::map<Endpoint, Fact> facts;
    std::map<std::string, std::vector<const Connector*>> inbound;  // component -> connectors in
    for (const auto& k : arch.connectors) inbound[k.target.component].push_back(&k);

    std::vector<Endpoint> derived;  // ports whose fact is recomputed by the worklist
    for (const auto& c : arch.components) {
        for (const auto& p : c.ports) {
            if (p.direction != Direction::Out) continue;
            Endpoint e{c.name, p.name};
            if (auto it = declared.find(e); it != declared.end()) {
                facts[e] = it->second;
            } else if (inbound.count(c.name)) {
                facts[e] = Fact{};  // bottom until the worklist raises it
                derived.push_back(e);
            } else {
                facts[e] = Fact::top();
            }
        }
    }

    // dependents[q] = derived ports whose value reads fact(q).
    std::map<Endpoint, std::vector<Endpoint>> dependents;
    for (const auto& e : derived)
        for (const Connector* k : inbound.at(e.component)) dependents[k->source].push_back(e);

    auto recompute = [&](const Endpoint& e) {
        Fact f;
        for (const Connector* k : inbound.at(e.component)) f = join(f, facts.at(k->source));
        return f;
    };

    std::deque<Endpoint> worklist(derived.begin(), derived.end());
    std::set<Endpoint> queued(derived.begin(), derived.end());
    while (!worklist.empty()) {
        Endpoint e = worklist.front();
        worklist.pop_front();
        queued.erase(e);
        Fact updated = recompute(e);
        if (updated == facts.at(e)) continue;
        facts[e] = std::move(updated);
        auto it = dependents.find(e);
        if (it == dependents.end()) continue;
        for (const auto& d : it->second)
            if (queued.insert(d).second) worklist.push_back(d);
    }

    // One verdict per connector whose target carries constraints.
    std::vector<Verdict> verdicts;
    for (const auto& k : arch.connectors) {
        auto cit = constraints.find(k.target);
        if (cit == constraints.end()) continue;
        const DataConstraints& want = cit->second;
        const Fact& have = facts.at(k.source);

        Verdict v;
        v.analysis = AnalysisKind::Dataflow;
        v.subject = k.id;

        if (have.bottom) {
            // No producible message reaches this connector.
            v.kind = VerdictKind::Compatible;
            verdicts.push_back(std::move(v));
            continue;
        }

        bool any_empty = false;
        std::vector<ResidualPredicate> residuals;
        std::string reason;

        if (want.max_size) {
            const Bytes max = *want.max_size;
            if (have.lo > max) {
                any_empty = true;
                reason = "size is at least " + format_size(have.lo) + " but at most " +
                         format_size(max) + " is accepted";
            } else if (!(have.hi && *have.hi <= max)) {
                ResidualPredicate r;
                r.connector = k.id;
                r.variable = Variable::Size;
                r.bound = max;
                residuals.push_back(std::move(r));
            }
        }
        if (want.allowed_types) {
            const std::set<std::string>& allowed = *want.allowed_types;
            if (!have.types) {
                ResidualPredicate r;
                r.connector = k.id;
                r.variable = Variable::Type;
                r.allowed = allowed;
                residuals.push_back(std::move(r));
            } else {
                bool subset = true;
                bool disjoint = true;
                for (const auto& t : *have.types) {
                    if (allowed.count(t))
                        disjoint = false;
                    else
                        subset = false;
                }
                if (allowed.empty()) subset = have.types->empty();
                if (disjoint && !have.types->empty()) {
                    if (!reason.empty()) reason += "; ";
                    reason += "no producible type is accepted";
                    any_empty = true;
                } else if (!subset) {
                    ResidualPredicate r;
                    r.connector = k.id;
                    r.variable = Variable::Type;
                    r.allowed = allowed;
                    residuals.push_back(std::move(r));
                }
            }
        }

        if (any_empty) {
            v.kind = VerdictKind::Incompatible;
            v.reason = reason;
        } else if (!residuals.empty()) {
            v.kind = VerdictKind::PartiallyCompatible;
            v.residuals = std::move(residuals);
        } else {
            v.kind = VerdictKind::Compatible;
        }
        verdicts.push_back(std::move(v));
    }

    std::stable_sort(verdicts.begin(), verdicts.end(),
                     [](const Verdict& a, const Verdict& b) { return a.subject < b.subject; });
    return verdicts;
}

// ---------------------------------------------------------------------------
// QoS analysis
// ---------------------------------------------------------------------------

namespace {

struct LatencyEstimate {
    Millis lower_bound = 0;
    bool has_top = false;
};

}  // namespace

std::vector<Verdict> check_qos(const Architecture& arch) {
    if (arch.qos.empty()) return {};

    std::map<Endpoint, const QosContract*> qos_ports;
    for (const auto& qc : arch.qos) {
        auto [it, inserted] = qos_ports.emplace(qc.port, &qc);
        if (!inserted) throw AnalysisError("multiple qos contracts on port " + to_string(qc.port));
    }

    // Port-level reverse edges: connector target <- source, and every out
    // port of a component <- each of its in ports (data may flow through).
    std::map<Endpoint, std::vector<Endpoint>> reverse;
    for (const auto& k : arch.connectors) reverse[k.target].push_back(k.source);
    for (const auto& c : arch.components) {
        std::vector<Endpoint> ins;
        for (const auto& p : c.ports)
            if (p.direction == Direction::In) ins.push_back({c.name, p.name});
        for (const auto& p : c.ports)
            if (p.direction == Direction::Out)
                for (const auto& in : ins) reverse[{c.name, p.name}].push_back(in);
    }

    // QoS predecessors of p: QoS-annotated ports that reach p without
    // passing through another QoS-annotated port.
    auto qos_predecessors = [&](const Endpoint& start) {
        std::set<Endpoint> result;
        std::set<Endpoint> visited = {start};
        std::deque<Endpoint> queue = {start};
        while (!queue.empty()) {
            Endpoint e = queue.front();
            queue.pop_front();
            auto it = reverse.find(e);
            if (it == reverse.end()) continue;
            for (const auto& prev : it->second) {
                if (!visited.insert(prev).second) continue;
                if (qos_ports.count(prev))
                    result.insert(prev);  // stop here: contributions beyond are its own
                else
                    queue.push_back(prev);
            }
        }
        return result;
    };

    std::map<Endpoint, std::set<Endpoint>> predecessors;
    for (const auto& [port, contract] : qos_ports) {
        (void)contract;
        predecessors[port] = qos_predecessors(port);
    }

    // Longest-path style evaluation over the condensed graph; a cycle among
    // QoS-annotated ports has no well-defined path sum.
    std::map<Endpoint, LatencyEstimate> memo;
    std::set<Endpoint> in_progress;
    auto evaluate = [&](auto&& self, const Endpoint& port) -> LatencyEstimate {
        if (auto it = memo.find(port); it != memo.end()) return it->second;
        if (!in_progress.insert(port).second)
            throw AnalysisError("cycle through qos-annotated port " + to_string(port));
        LatencyEstimate estimate;
        for (const auto& prev : predecessors.at(port)) {
            LatencyEstimate upstream = self(self, prev);
            estimate.lower_bound = std::max(estimate.lower_bound, upstream.lower_bound);
            estimate.has_top = estimate.has_top || upstream.has_top;
        }
        const QosContract* contract = qos_ports.at(port);
        if (contract->offered) {
            if (contract->offered->ms)
                estimate.lower_bound += *contract->offered->ms;
            else
                estimate.has_top = true;
        }
        in_progress.erase(port);
        memo[port] = estimate;
        return estimate;
    };

    std::vector<Verdict> verdicts;
    for (const auto& [port, contract] : qos_ports) {
        if (!contract->required_max_ms) continue;
        const Millis required = *contract->required_max_ms;
        LatencyEstimate predicted = evaluate(evaluate, port);

        Verdict v;
        v.analysis = AnalysisKind::Qos;
        v.subject = "qos:" + to_string(port);
        if (predicted.lower_bound > required) {
            v.kind = VerdictKind::Incompatible;
            v.reason = "predicted latency is at least " + std::to_string(predicted.lower_bound) +
                       "ms but at most " + std::to_string(required) + "ms is required";
        } else if (predicted.has_top) {
            auto incoming = arch.connectors_targeting(port);
            if (incoming.empty())
                throw AnalysisError("unknown latency at unbound port " + to_string(port) +
                                    " cannot be checked at runtime");
            v.kind = VerdictKind::PartiallyCompatible;
            for (const Connector* k : incoming) {
                ResidualPredicate r;
                r.connector = k->id;
                r.variable = Variable::Latency;
                r.bound = required;
                v.residuals.push_back(std::move(r));
            }
        } else {
            v.kind = VerdictKind::Compatible;
        }
        verdicts.push_back(std::move(v));
    }
    return verdicts;  // qos_ports iterates in Endpoint order, already stable
}

// ---------------------------------------------------------------------------
// Combined analysis
// ---------------------------------------------------------------------------

AnalysisReport analyze(const Architecture& arch, const AnalysisOptions& options) {
    WellFormednessReport wf = validate(arch);
    if (!wf.ok())
        throw std::invalid_argument("analyze: ill-formed architecture:\n" + wf.summary());

    AnalysisReport report;
    auto append = [&](std::vector<Verdict> verdicts) {
        for (auto& v : verdicts) report.verdicts.push_back(std::move(v));
    };
    append(check_structural(arch));
    if (!arch.behavioral.empty()) report.verdicts.push_back(check_behavioral(arch, options));
    append(check_dataflow(arch));
    append(check_qos(arch));

    report.gate_passed = true;
    for (const auto& v : report.verdicts)
        if (v.kind == VerdictKind::Incompatible) report.gate_passed = false;
    return report;
}

json residual_to_json(const ResidualPredicate& r) {
    json j;
    j["connector"] = r.connector;
    j["variable"] = to_string(r.variable);
    if (r.variable == Variable::Type) {
        j["test"] = "MemberOf";
        j["bound"] = r.allowed;
    } else {
        j["test"] = "LessOrEqual";
        j["bound"] = r.bound;
    }
    return j;
}

ResidualPredicate residual_from_json(const json& j) {
    ResidualPredicate r;
    r.connector = j.at("connector").get<std::string>();
    const std::string variable = j.at("variable").get<std::string>();
    if (variable == "Size") r.variable = Variable::Size;
    else if (variable == "Type") r.variable = Variable::Type;
    else if (variable == "Latency") r.variable = Variable::Latency;
    else throw std::invalid_argument("unknown residual variable: " + variable);
    if (r.variable == Variable::Type)
        r.allowed = j.at("bound").get<std::set<std::string>>();
    else
        r.bound = j.at("bound").get<Bytes>();
    return r;
}

std::string AnalysisReport::to_json() const {
    json j;
    j["gate"] = gate_passed;
    j["verdicts"] = json::array();
    for (const auto& v : verdicts) {
        json jv;
        jv["analysis"] = calico::to_string(v.analysis);
        jv["subject"] = v.subject;
        jv["kind"] = calico::to_string(v.kind);
        if (v.kind == VerdictKind::Incompatible) jv["reason"] = v.reason;
        if (v.kind == VerdictKind::PartiallyCompatible) {
            jv["residuals"] = json::array();
            for (const auto& r : v.residuals) jv["residuals"].push_back(residual_to_json(r));
        }
        j["verdicts"].push_back(std::move(jv));
    }
    return j.dump(2);
}

}  // namespace calico
