#include "calico/runtime.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace calico {

using nlohmann::json;

namespace {

// Guards against script emission loops: no single drain may deliver more.
constexpr std::size_t kDispatchBudget = 1000000;

json attr_value_to_json(const AttrValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
    return std::get<std::string>(v);
}

json attr_map_to_json(const AttrMap& attrs) {
    json j = json::object();
    for (const auto& [key, value] : attrs) j[key] = attr_value_to_json(value);
    return j;
}

}  // namespace

std::string attr_to_string(const AttrValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    return std::get<std::string>(v);
}

// ---------------------------------------------------------------------------
// Attribute expressions and guards
// ---------------------------------------------------------------------------

AttrExprPtr AttrExpr::make_literal(AttrValue v) {
    auto e = std::make_shared<AttrExpr>();
    e->kind = Kind::Literal;
    e->literal = std::move(v);
    return e;
}

AttrExprPtr AttrExpr::make_ref(std::string name) {
    auto e = std::make_shared<AttrExpr>();
    e->kind = Kind::Ref;
    e->ref = std::move(name);
    return e;
}

AttrExprPtr AttrExpr::make_binary(char op, AttrExprPtr a, AttrExprPtr b) {
    auto e = std::make_shared<AttrExpr>();
    e->kind = Kind::Binary;
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

AttrExprPtr AttrExpr::make_min_max(bool is_min, AttrExprPtr a, AttrExprPtr b) {
    auto e = std::make_shared<AttrExpr>();
    e->kind = Kind::MinMax;
    e->is_min = is_min;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

namespace {

std::int64_t as_number(const AttrValue& v, const char* context) {
    if (!std::holds_alternative<std::int64_t>(v))
        throw RuntimeError(std::string("script expression: ") + context +
                           " needs a numeric value, got \"" + std::get<std::string>(v) + "\"");
    return std::get<std::int64_t>(v);
}

}  // namespace

AttrValue eval_attr_expr(const AttrExpr& expr, const AttrMap& incoming) {
    switch (expr.kind) {
        case AttrExpr::Kind::Literal:
            return expr.literal;
        case AttrExpr::Kind::Ref: {
            auto it = incoming.find(expr.ref);
            if (it != incoming.end()) return it->second;
            return expr.ref;  // unknown attribute: a plain token constant
        }
        case AttrExpr::Kind::Binary: {
            const std::int64_t a = as_number(eval_attr_expr(*expr.lhs, incoming), "arithmetic");
            const std::int64_t b = as_number(eval_attr_expr(*expr.rhs, incoming), "arithmetic");
            switch (expr.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/':
                    if (b == 0) throw RuntimeError("script expression: division by zero");
                    return a / b;
            }
            throw RuntimeError("script expression: unknown operator");
        }
        case AttrExpr::Kind::MinMax: {
            const std::int64_t a = as_number(eval_attr_expr(*expr.lhs, incoming), "min/max");
            const std::int64_t b = as_number(eval_attr_expr(*expr.rhs, incoming), "min/max");
            return expr.is_min ? std::min(a, b) : std::max(a, b);
        }
    }
    throw RuntimeError("script expression: malformed node");
}

bool eval_guard(const Guard& guard, const AttrMap& incoming) {
    for (const auto& cmp : guard.conjuncts) {
        const AttrValue lhs = eval_attr_expr(*cmp.lhs, incoming);
        const AttrValue rhs = eval_attr_expr(*cmp.rhs, incoming);
        bool holds = false;
        if (std::holds_alternative<std::string>(lhs) || std::holds_alternative<std::string>(rhs)) {
            if (cmp.op != "==" && cmp.op != "!=")
                throw RuntimeError("script guard: tokens only compare with == or !=");
            const bool eq = attr_to_string(lhs) == attr_to_string(rhs) &&
                            lhs.index() == rhs.index();
            holds = cmp.op == "==" ? eq : !eq;
        } else {
            const std::int64_t a = std::get<std::int64_t>(lhs);
            const std::int64_t b = std::get<std::int64_t>(rhs);
            if (cmp.op == "==") holds = a == b;
            else if (cmp.op == "!=") holds = a != b;
            else if (cmp.op == "<") holds = a < b;
            else if (cmp.op == "<=") holds = a <= b;
            else if (cmp.op == ">") holds = a > b;
            else if (cmp.op == ">=") holds = a >= b;
            else throw RuntimeError("script guard: unknown comparison " + cmp.op);
        }
        if (!holds) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

std::string TraceEntry::to_json_line() const {
    json j;
    if (const auto* d = std::get_if<Delivery>(&value)) {
        j["kind"] = "message";
        j["connector"] = d->message.connector;
        j["target"] = to_string(d->at);
        j["tick"] = d->tick;
        j["sentAt"] = d->message.sent_at;
        j["attrs"] = attr_map_to_json(d->message.attrs);
    } else {
        const auto& e = std::get<ReifiedEvent>(value);
        j["kind"] = "event";
        j["probe"] = e.probe;
        j["connector"] = e.connector;
        j["tick"] = e.tick;
        j["captured"] = attr_map_to_json(e.captured);
    }
    return j.dump();
}

std::size_t Trace::delivery_count() const {
    std::size_t n = 0;
    for (const auto& e : entries)
        if (!e.is_event()) ++n;
    return n;
}

std::size_t Trace::event_count() const {
    std::size_t n = 0;
    for (const auto& e : entries)
        if (e.is_event()) ++n;
    return n;
}

std::string Trace::to_jsonl() const {
    std::string out;
    for (const auto& e : entries) {
        out += e.to_json_line();
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// ReconfigOp
// ---------------------------------------------------------------------------

ReconfigOp ReconfigOp::add_component(Component c) {
    ReconfigOp op;
    op.kind = Kind::AddComponent;
    op.component = std::move(c);
    return op;
}

ReconfigOp ReconfigOp::remove_component(std::string name) {
    ReconfigOp op;
    op.kind = Kind::RemoveComponent;
    op.name = std::move(name);
    return op;
}

ReconfigOp ReconfigOp::add_connector(Connector k) {
    ReconfigOp op;
    op.kind = Kind::AddConnector;
    op.connector = std::move(k);
    return op;
}

ReconfigOp ReconfigOp::remove_connector(std::string id) {
    ReconfigOp op;
    op.kind = Kind::RemoveConnector;
    op.name = std::move(id);
    return op;
}

ReconfigOp ReconfigOp::attach_probe(Probe p) {
    ReconfigOp op;
    op.kind = Kind::AttachProbe;
    op.probe = std::move(p);
    return op;
}

ReconfigOp ReconfigOp::detach_probe(std::string id) {
    ReconfigOp op;
    op.kind = Kind::DetachProbe;
    op.name = std::move(id);
    return op;
}

std::string ReconfigOp::describe() const {
    switch (kind) {
        case Kind::AddComponent: return "add-component " + component.name;
        case Kind::RemoveComponent: return "remove-component " + name;
        case Kind::AddConnector: return "add-connector " + connector.id;
        case Kind::RemoveConnector: return "remove-connector " + name;
        case Kind::AttachProbe: return "attach-probe " + probe.id;
        case Kind::DetachProbe: return "detach-probe " + name;
    }
    return "?";
}

// ---------------------------------------------------------------------------
// RunningSystem
// ---------------------------------------------------------------------------

std::size_t RunningSystem::in_flight() const {
    std::size_t n = direct_.size();
    for (const auto& [id, queue] : queues_) n += queue.size();
    return n;
}

Architecture RunningSystem::structural_view() const {
    Architecture arch;
    arch.name = name_;
    for (const auto& [name, component] : components_) arch.components.push_back(component);
    for (const auto& [id, connector] : bindings_) arch.connectors.push_back(connector);
    return arch;
}

void RunningSystem::set_scripts(std::map<std::string, BehaviorScript> scripts) {
    scripts_ = std::move(scripts);
}

const Component& RunningSystem::component_or_throw(const std::string& name) const {
    auto it = components_.find(name);
    if (it == components_.end()) throw RuntimeError("unknown component instance: " + name);
    return it->second;
}

void RunningSystem::emit_from(const Endpoint& source, const AttrMap& attrs, Tick origin) {
    instances_[source.component].emitted += 1;
    for (const auto& [id, connector] : bindings_) {
        if (connector.source != source) continue;
        Message m;
        m.connector = id;
        m.attrs = attrs;
        m.sent_at = clock_;
        m.origin = origin;
        queues_[id].push_back(std::move(m));
    }
}

namespace {

void apply_attr_defaults(AttrMap& attrs, const AttrMap& incoming) {
    if (!attrs.count("size")) {
        auto it = incoming.find("size");
        attrs["size"] = it != incoming.end() ? it->second : AttrValue{std::int64_t{0}};
    }
    if (!attrs.count("type")) {
        auto it = incoming.find("type");
        attrs["type"] = it != incoming.end() ? it->second : AttrValue{std::string("untyped")};
    }
    if (std::holds_alternative<std::int64_t>(attrs.at("size")) &&
        std::get<std::int64_t>(attrs.at("size")) < 0)
        throw RuntimeError("message size must be non-negative");
}

AttrMap eval_attr_specs(const std::vector<std::pair<std::string, AttrExprPtr>>& specs,
                        const AttrMap& incoming) {
    AttrMap out;
    for (const auto& [key, expr] : specs) out[key] = eval_attr_expr(*expr, incoming);
    return out;
}

}  // namespace

void RunningSystem::inject(const Stimulus& stimulus, Trace& trace) {
    (void)trace;
    if (stimulus.tick > clock_) clock_ = stimulus.tick;

    const Component& component = component_or_throw(stimulus.at.component);
    const Port* port = component.find_port(stimulus.at.port);
    if (!port)
        throw RuntimeError("stimulus references unknown port " + to_string(stimulus.at));

    if (port->direction == Direction::Out) {
        AttrMap attrs = stimulus.attrs;
        // A declared source spec shapes the emission; stimulus attributes
        // feed its expressions.
        if (auto it = scripts_.find(component.name); it != scripts_.end()) {
            for (const auto& source : it->second.sources) {
                if (source.port != stimulus.at.port) continue;
                attrs = eval_attr_specs(source.attrs, stimulus.attrs);
                break;
            }
        }
        apply_attr_defaults(attrs, stimulus.attrs);
        emit_from(stimulus.at, attrs, clock_);
    } else {
        AttrMap attrs = stimulus.attrs;
        apply_attr_defaults(attrs, {});
        Message m;
        m.connector = "";  // environment injection, not connector traffic
        m.attrs = std::move(attrs);
        m.sent_at = clock_;
        m.origin = clock_;
        direct_.push_back({stimulus.at, std::move(m)});
    }
}

void RunningSystem::deliver(const Message& message, const Endpoint& target, Trace& trace) {
    instances_[target.component].received += 1;

    Delivery d;
    d.message = message;
    d.at = target;
    d.tick = clock_;
    trace.entries.push_back({d});

    if (!message.connector.empty()) {
        for (const auto& [probe_id, probe] : probes_) {
            if (probe.connector != message.connector) continue;
            ReifiedEvent event;
            event.probe = probe_id;
            event.connector = message.connector;
            event.tick = clock_;
            for (Variable v : probe.captures) {
                switch (v) {
                    case Variable::Size:
                        event.captured["Size"] = message.attrs.count("size")
                                                     ? message.attrs.at("size")
                                                     : AttrValue{std::int64_t{0}};
                        break;
                    case Variable::Type:
                        event.captured["Type"] = message.attrs.count("type")
                                                     ? message.attrs.at("type")
                                                     : AttrValue{std::string("untyped")};
                        break;
                    case Variable::Latency:
                        event.captured["Latency"] =
                            static_cast<std::int64_t>(clock_ - message.origin);
                        break;
                }
            }
            trace.entries.push_back({event});
            if (observer_) observer_(event);
        }
    }

    // Scripts fire synchronously: matching rules evaluate against the
    // incoming attributes and enqueue their emissions at the current tick.
    auto it = scripts_.find(target.component);
    if (it == scripts_.end()) return;
    for (const auto& rule : it->second.rules) {
        if (rule.on_port != target.port) continue;
        if (rule.guard && !eval_guard(*rule.guard, message.attrs)) continue;
        for (const auto& emit : rule.emits) {
            AttrMap attrs = eval_attr_specs(emit.attrs, message.attrs);
            apply_attr_defaults(attrs, message.attrs);
            emit_from({target.component, emit.port}, attrs, message.origin);
        }
    }
}

void RunningSystem::drain(Trace& trace) {
    std::size_t budget = kDispatchBudget;
    while (true) {
        if (budget-- == 0)
            throw RuntimeError("dispatch budget exceeded; a script emission loop is likely");
        if (!direct_.empty()) {
            auto [target, message] = std::move(direct_.front());
            direct_.pop_front();
            deliver(message, target, trace);
            continue;
        }
        // Lowest connector id with pending traffic goes first.
        auto next = queues_.end();
        for (auto it = queues_.begin(); it != queues_.end(); ++it) {
            if (!it->second.empty()) {
                next = it;
                break;
            }
        }
        if (next == queues_.end()) return;
        Message message = std::move(next->second.front());
        next->second.pop_front();
        const Connector& connector = bindings_.at(next->first);
        deliver(message, connector.target, trace);
    }
}

Trace RunningSystem::run_scenario(const Scenario& scenario) {
    if (status_ != RunStatus::Running)
        throw RuntimeError("run_scenario: system is not running");

    Trace trace;
    for (const auto& stimulus : scenario.stimuli) {
        if (stimulus.tick > clock_) drain(trace);  // finish the previous tick first
        inject(stimulus, trace);
    }
    drain(trace);
    return trace;
}

void RunningSystem::quiesce(Trace& trace) {
    if (status_ != RunStatus::Running) throw RuntimeError("quiesce: system is not running");
    drain(trace);
    status_ = RunStatus::Quiesced;
}

void RunningSystem::resume() {
    if (status_ != RunStatus::Quiesced) throw RuntimeError("resume: system is not quiesced");
    status_ = RunStatus::Running;
}

void RunningSystem::apply_one(const ReconfigOp& op) {
    switch (op.kind) {
        case ReconfigOp::Kind::AddComponent: {
            if (components_.count(op.component.name))
                throw RuntimeError("add-component: duplicate name " + op.component.name);
            components_[op.component.name] = op.component;
            instances_[op.component.name] = InstanceState{};
            break;
        }
        case ReconfigOp::Kind::RemoveComponent: {
            if (!components_.count(op.name))
                throw RuntimeError("remove-component: unknown component " + op.name);
            for (const auto& [id, k] : bindings_)
                if (k.source.component == op.name || k.target.component == op.name)
                    throw RuntimeError("remove-component: " + op.name + " is still bound by " + id);
            components_.erase(op.name);
            instances_.erase(op.name);
            break;
        }
        case ReconfigOp::Kind::AddConnector: {
            const Connector& k = op.connector;
            if (bindings_.count(k.id))
                throw RuntimeError("add-connector: duplicate id " + k.id);
            auto src_comp = components_.find(k.source.component);
            auto dst_comp = components_.find(k.target.component);
            if (src_comp == components_.end() || dst_comp == components_.end())
                throw RuntimeError("add-connector: dangling endpoint on " + k.id);
            const Port* src = src_comp->second.find_port(k.source.port);
            const Port* dst = dst_comp->second.find_port(k.target.port);
            if (!src || !dst) throw RuntimeError("add-connector: dangling endpoint on " + k.id);
            if (src->direction != Direction::Out || dst->direction != Direction::In)
                throw RuntimeError("add-connector: direction mismatch on " + k.id);
            bindings_[k.id] = k;
            queues_[k.id];  // fresh empty FIFO
            break;
        }
        case ReconfigOp::Kind::RemoveConnector: {
            if (!bindings_.count(op.name))
                throw RuntimeError("remove-connector: unknown connector " + op.name);
            for (const auto& [pid, probe] : probes_)
                if (probe.connector == op.name)
                    throw RuntimeError("remove-connector: probe " + pid + " still attached to " +
                                       op.name);
            if (!queues_[op.name].empty())
                throw RuntimeError("remove-connector: " + op.name + " has in-flight messages");
            bindings_.erase(op.name);
            queues_.erase(op.name);
            break;
        }
        case ReconfigOp::Kind::AttachProbe: {
            if (probes_.count(op.probe.id))
                throw RuntimeError("attach-probe: duplicate id " + op.probe.id);
            if (!bindings_.count(op.probe.connector))
                throw RuntimeError("attach-probe: unknown connector " + op.probe.connector);
            probes_[op.probe.id] = op.probe;
            break;
        }
        case ReconfigOp::Kind::DetachProbe: {
            if (!probes_.count(op.name))
                throw RuntimeError("detach-probe: unknown probe " + op.name);
            probes_.erase(op.name);
            break;
        }
    }
}

void RunningSystem::apply_ops(const std::vector<ReconfigOp>& ops) {
    if (status_ != RunStatus::Quiesced)
        throw RuntimeError("apply_ops: system must be quiesced first");

    // Transactional: any failure restores the runtime view untouched.
    auto components = components_;
    auto bindings = bindings_;
    auto probes = probes_;
    auto instances = instances_;
    auto queues = queues_;
    try {
        for (const auto& op : ops) apply_one(op);
    } catch (...) {
        components_ = std::move(components);
        bindings_ = std::move(bindings);
        probes_ = std::move(probes);
        instances_ = std::move(instances);
        queues_ = std::move(queues);
        throw;
    }
}

RunningSystem RunningSystem::rehydrate(const Architecture& arch, const std::vector<Probe>& probes,
                                       std::map<std::string, BehaviorScript> scripts,
                                       std::uint64_t seed, Tick clock, RunStatus status,
                                       std::map<std::string, InstanceState> instances,
                                       std::vector<std::string> construction_log) {
    RunningSystem sys;
    sys.name_ = arch.name;
    sys.seed_ = seed;
    for (const auto& c : arch.components) sys.components_[c.name] = c;
    for (const auto& k : arch.connectors) {
        sys.bindings_[k.id] = k;
        sys.queues_[k.id];
    }
    for (const auto& p : probes) sys.probes_[p.id] = p;
    sys.instances_ = std::move(instances);
    for (const auto& c : arch.components) sys.instances_.emplace(c.name, InstanceState{});
    sys.scripts_ = std::move(scripts);
    sys.clock_ = clock;
    sys.status_ = status;
    sys.construction_log_ = std::move(construction_log);
    return sys;
}

void validate_scripts(const Architecture& arch,
                      const std::map<std::string, BehaviorScript>& scripts) {
    for (const auto& c : arch.components) {
        bool has_in = false;
        for (const auto& p : c.ports)
            if (p.direction == Direction::In) has_in = true;
        if (has_in && !scripts.count(c.name))
            throw RuntimeError("missing behavior script for component " + c.name);
    }
    for (const auto& [name, script] : scripts) {
        const Component* c = arch.find_component(name);
        if (!c) continue;  // scripts for undeployed components are ignored
        for (const auto& rule : script.rules) {
            const Port* p = c->find_port(rule.on_port);
            if (!p || p->direction != Direction::In)
                throw RuntimeError("script for " + name + ": \"on " + rule.on_port +
                                   "\" does not name an in port");
            for (const auto& emit : rule.emits) {
                const Port* out = c->find_port(emit.port);
                if (!out || out->direction != Direction::Out)
                    throw RuntimeError("script for " + name + ": \"emit " + emit.port +
                                       "\" does not name an out port");
            }
        }
        for (const auto& source : script.sources) {
            const Port* out = c->find_port(source.port);
            if (!out || out->direction != Direction::Out)
                throw RuntimeError("script for " + name + ": \"source " + source.port +
                                   "\" does not name an out port");
        }
    }
}

RunningSystem instantiate(const Architecture& input, const DeploymentConfig& config,
                          std::map<std::string, BehaviorScript> scripts, std::uint64_t seed,
                          const AnalysisOptions& options) {
    const Architecture arch = canonicalize(input);
    AnalysisReport report = analyze(arch, options);
    if (!report.gate_passed) {
        std::ostringstream os;
        os << "deployment refused: the analysis gate did not pass;";
        for (const auto& v : report.verdicts)
            if (v.kind == VerdictKind::Incompatible) os << " [" << v.subject << "] " << v.reason;
        throw RuntimeError(os.str());
    }
    validate_scripts(arch, scripts);

    RunningSystem sys;
    sys.name_ = arch.name;
    sys.seed_ = seed;
    sys.scripts_ = std::move(scripts);

    std::vector<ReconfigOp> ops;
    for (const auto& c : arch.components) ops.push_back(ReconfigOp::add_component(c));
    for (const auto& k : arch.connectors) ops.push_back(ReconfigOp::add_connector(k));
    for (const auto& point : config.points) ops.push_back(ReconfigOp::attach_probe(point.probe));

    for (const auto& op : ops) {
        sys.apply_one(op);
        std::string line = op.describe();
        // The construction sequence speaks in create/attach terms.
        if (line.rfind("add-", 0) == 0) line = "create-" + line.substr(4);
        sys.construction_log_.push_back(std::move(line));
    }
    sys.status_ = RunStatus::Running;
    return sys;
}

bool mirrors(const RunningSystem& sys, const Architecture& input) {
    Architecture arch = canonicalize(input);
    if (sys.components().size() != arch.components.size()) return false;
    if (sys.bindings().size() != arch.connectors.size()) return false;
    for (const auto& c : arch.components) {
        auto it = sys.components().find(c.name);
        if (it == sys.components().end() || !(it->second == c)) return false;
    }
    for (const auto& k : arch.connectors) {
        auto it = sys.bindings().find(k.id);
        if (it == sys.bindings().end() || !(it->second == k)) return false;
    }
    return true;
}

}  // namespace calico
