#include "calico/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace calico {

std::string to_string(const Endpoint& e) { return e.component + "." + e.port; }

TermPtr ProcessTerm::make_action(std::string port, ActionKind kind) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::Action;
    t->port = std::move(port);
    t->action = kind;
    return t;
}

TermPtr ProcessTerm::make_seq(TermPtr a, TermPtr b) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::Seq;
    t->left = std::move(a);
    t->right = std::move(b);
    return t;
}

TermPtr ProcessTerm::make_choice(TermPtr a, TermPtr b) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::Choice;
    t->left = std::move(a);
    t->right = std::move(b);
    return t;
}

TermPtr ProcessTerm::make_star(TermPtr t) {
    auto s = std::make_shared<ProcessTerm>();
    s->kind = Kind::Star;
    s->left = std::move(t);
    return s;
}

TermPtr ProcessTerm::make_skip() {
    static const TermPtr skip = std::make_shared<ProcessTerm>();
    return skip;
}

int compare_terms(const ProcessTerm& a, const ProcessTerm& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    switch (a.kind) {
        case ProcessTerm::Kind::Skip:
            return 0;
        case ProcessTerm::Kind::Action:
            if (a.port != b.port) return a.port < b.port ? -1 : 1;
            if (a.action != b.action) return a.action < b.action ? -1 : 1;
            return 0;
        case ProcessTerm::Kind::Star:
            return compare_terms(*a.left, *b.left);
        case ProcessTerm::Kind::Seq:
        case ProcessTerm::Kind::Choice: {
            int c = compare_terms(*a.left, *b.left);
            if (c != 0) return c;
            return compare_terms(*a.right, *b.right);
        }
    }
    return 0;
}

bool terms_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return compare_terms(*a, *b) == 0;
}

namespace {

// Precedence: Seq (lowest), Choice, Star, atoms. Parenthesize a child
// whenever its operator binds less tightly than the parent's.
int precedence(ProcessTerm::Kind k) {
    switch (k) {
        case ProcessTerm::Kind::Seq: return 0;
        case ProcessTerm::Kind::Choice: return 1;
        case ProcessTerm::Kind::Star: return 2;
        default: return 3;
    }
}

void render_term(const ProcessTerm& t, int min_prec, std::string& out) {
    const bool parens = precedence(t.kind) < min_prec;
    if (parens) out += "(";
    switch (t.kind) {
        case ProcessTerm::Kind::Skip:
            out += "skip";
            break;
        case ProcessTerm::Kind::Action:
            out += t.port;
            out += t.action == ActionKind::Send ? "!" : "?";
            break;
        case ProcessTerm::Kind::Seq:
            render_term(*t.left, 0, out);
            out += " ; ";
            render_term(*t.right, 1, out);
            break;
        case ProcessTerm::Kind::Choice:
            render_term(*t.left, 1, out);
            out += " | ";
            render_term(*t.right, 2, out);
            break;
        case ProcessTerm::Kind::Star:
            render_term(*t.left, 3, out);
            out += "*";
            break;
    }
    if (parens) out += ")";
}

}  // namespace

std::string term_to_string(const ProcessTerm& t) {
    std::string out;
    render_term(t, 0, out);
    return out;
}

const Port* Component::find_port(const std::string& port_name) const {
    for (const auto& p : ports)
        if (p.name == port_name) return &p;
    return nullptr;
}

const Component* Architecture::find_component(const std::string& comp_name) const {
    for (const auto& c : components)
        if (c.name == comp_name) return &c;
    return nullptr;
}

const Port* Architecture::find_port(const Endpoint& e) const {
    const Component* c = find_component(e.component);
    return c ? c->find_port(e.port) : nullptr;
}

const Connector* Architecture::find_connector(const std::string& id) const {
    for (const auto& k : connectors)
        if (k.id == id) return &k;
    return nullptr;
}

std::vector<const Connector*> Architecture::connectors_targeting(const Endpoint& e) const {
    std::vector<const Connector*> out;
    for (const auto& k : connectors)
        if (k.target == e) out.push_back(&k);
    return out;
}

std::vector<const Connector*> Architecture::connectors_from(const Endpoint& e) const {
    std::vector<const Connector*> out;
    for (const auto& k : connectors)
        if (k.source == e) out.push_back(&k);
    return out;
}

std::vector<const Connector*> Architecture::connectors_at(const Endpoint& e) const {
    std::vector<const Connector*> out;
    for (const auto& k : connectors)
        if (k.source == e || k.target == e) out.push_back(&k);
    return out;
}

bool Architecture::port_bound(const Endpoint& e) const {
    for (const auto& k : connectors)
        if (k.source == e || k.target == e) return true;
    return false;
}

std::string WellFormednessReport::summary() const {
    std::ostringstream os;
    for (const auto& i : issues) os << i.location << ": " << i.message << "\n";
    return os.str();
}

namespace {

void check_contract_subject(const Architecture& arch, const Endpoint& e,
                            const std::string& location, WellFormednessReport& report) {
    if (!arch.find_port(e))
        report.issues.push_back({location, "dangling endpoint: " + to_string(e)});
}

void collect_protocol_ports(const ProcessTerm& t, std::set<std::string>& out) {
    switch (t.kind) {
        case ProcessTerm::Kind::Action:
            out.insert(t.port);
            break;
        case ProcessTerm::Kind::Seq:
        case ProcessTerm::Kind::Choice:
            collect_protocol_ports(*t.left, out);
            collect_protocol_ports(*t.right, out);
            break;
        case ProcessTerm::Kind::Star:
            collect_protocol_ports(*t.left, out);
            break;
        case ProcessTerm::Kind::Skip:
            break;
    }
}

}  // namespace

WellFormednessReport validate(const Architecture& arch) {
    WellFormednessReport report;
    auto add = [&](std::string location, std::string message) {
        report.issues.push_back({std::move(location), std::move(message)});
    };

    std::set<std::string> component_names;
    for (const auto& c : arch.components) {
        if (!component_names.insert(c.name).second)
            add("component " + c.name, "duplicate component name \"" + c.name + "\"");
        std::set<std::string> port_names;
        for (const auto& p : c.ports) {
            if (!port_names.insert(p.name).second)
                add("component " + c.name, "duplicate port name \"" + p.name + "\"");
        }
    }

    std::set<std::string> connector_ids;
    for (const auto& k : arch.connectors) {
        const std::string loc = "connector " + k.id;
        if (!connector_ids.insert(k.id).second)
            add(loc, "duplicate connector id \"" + k.id + "\"");
        const Port* src = arch.find_port(k.source);
        const Port* dst = arch.find_port(k.target);
        if (!src) add(loc, "dangling endpoint: " + to_string(k.source));
        if (!dst) add(loc, "dangling endpoint: " + to_string(k.target));
        if (src && src->direction != Direction::Out)
            add(loc, "direction mismatch: source " + to_string(k.source) + " is not an out port");
        if (dst && dst->direction != Direction::In)
            add(loc, "direction mismatch: target " + to_string(k.target) + " is not an in port");
    }

    for (const auto& c : arch.components) {
        for (const auto& p : c.ports) {
            if (p.required && !arch.port_bound({c.name, p.name}))
                add("component " + c.name + " port " + p.name,
                    "required port \"" + p.name + "\" is not bound by any connector");
        }
    }

    for (const auto& sc : arch.structural) {
        const std::string loc = "structural contract on " + to_string(sc.subject);
        check_contract_subject(arch, sc.subject, loc, report);
        if (sc.allowed_clients) {
            if (sc.allowed_clients->empty())
                add(loc, "access restriction allows no clients");
            for (const auto& client : *sc.allowed_clients)
                if (!arch.find_component(client))
                    add(loc, "allowed client \"" + client + "\" is not a component");
        }
    }

    for (const auto& bc : arch.behavioral) {
        const std::string loc = "behavioral contract on " + bc.component;
        const Component* c = arch.find_component(bc.component);
        if (!c) {
            add(loc, "unknown component \"" + bc.component + "\"");
            continue;
        }
        if (!bc.protocol) {
            add(loc, "missing protocol term");
            continue;
        }
        std::set<std::string> used;
        collect_protocol_ports(*bc.protocol, used);
        for (const auto& port : used)
            if (!c->find_port(port))
                add(loc, "protocol action \"" + port + "\" does not name a port of component \"" +
                             bc.component + "\"");
    }

    for (const auto& dc : arch.dataflow) {
        const std::string loc = "dataflow contract on " + to_string(dc.port);
        const Port* p = arch.find_port(dc.port);
        if (!p) {
            add(loc, "dangling endpoint: " + to_string(dc.port));
            continue;
        }
        if (dc.produced) {
            if (p->direction != Direction::Out)
                add(loc, "produces declared on non-out port");
            if (dc.produced->size_hi && dc.produced->size_lo > *dc.produced->size_hi)
                add(loc, "size interval lower bound exceeds upper bound");
        }
        if (dc.constraints && p->direction != Direction::In)
            add(loc, "requires declared on non-in port");
    }

    for (const auto& qc : arch.qos) {
        const std::string loc = "qos contract on " + to_string(qc.port);
        check_contract_subject(arch, qc.port, loc, report);
    }

    return report;
}

namespace {

std::string facts_key(const std::optional<DataFacts>& f) {
    if (!f) return "";
    std::ostringstream os;
    os << f->size_lo << "," << (f->size_hi ? std::to_string(*f->size_hi) : "top") << ";";
    if (f->types)
        for (const auto& t : *f->types) os << t << ",";
    else
        os << "top";
    return os.str();
}

std::string constraints_key(const std::optional<DataConstraints>& c) {
    if (!c) return "";
    std::ostringstream os;
    os << (c->max_size ? std::to_string(*c->max_size) : "-") << ";";
    if (c->allowed_types)
        for (const auto& t : *c->allowed_types) os << t << ",";
    return os.str();
}

}  // namespace

Architecture canonicalize(Architecture arch) {
    WellFormednessReport report = validate(arch);
    if (!report.ok())
        throw std::invalid_argument("canonicalize: ill-formed architecture:\n" + report.summary());

    std::sort(arch.components.begin(), arch.components.end(),
              [](const Component& a, const Component& b) { return a.name < b.name; });
    for (auto& c : arch.components)
        std::sort(c.ports.begin(), c.ports.end(),
                  [](const Port& a, const Port& b) { return a.name < b.name; });
    std::sort(arch.connectors.begin(), arch.connectors.end(),
              [](const Connector& a, const Connector& b) { return a.id < b.id; });

    std::sort(arch.structural.begin(), arch.structural.end(),
              [](const StructuralContract& a, const StructuralContract& b) {
                  return std::tie(a.subject, a.allowed_clients, a.must_be_bound) <
                         std::tie(b.subject, b.allowed_clients, b.must_be_bound);
              });
    std::sort(arch.behavioral.begin(), arch.behavioral.end(),
              [](const BehavioralContract& a, const BehavioralContract& b) {
                  if (a.component != b.component) return a.component < b.component;
                  return compare_terms(*a.protocol, *b.protocol) < 0;
              });
    std::sort(arch.dataflow.begin(), arch.dataflow.end(),
              [](const DataflowContract& a, const DataflowContract& b) {
                  if (a.port != b.port) return a.port < b.port;
                  return facts_key(a.produced) + "|" + constraints_key(a.constraints) <
                         facts_key(b.produced) + "|" + constraints_key(b.constraints);
              });
    std::sort(arch.qos.begin(), arch.qos.end(), [](const QosContract& a, const QosContract& b) {
        auto key = [](const QosContract& q) {
            return std::tuple(q.port, q.offered.has_value(),
                              q.offered && q.offered->ms ? *q.offered->ms + 1 : Millis{0},
                              q.required_max_ms ? *q.required_max_ms + 1 : Millis{0});
        };
        return key(a) < key(b);
    });
    return arch;
}

}  // namespace calico
