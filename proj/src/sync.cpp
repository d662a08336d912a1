#include "calico/sync.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace calico {

using nlohmann::json;

namespace {

json component_to_json(const Component& c) {
    json j;
    j["name"] = c.name;
    j["ports"] = json::array();
    for (const auto& p : c.ports) {
        json jp;
        jp["name"] = p.name;
        jp["direction"] = p.direction == Direction::In ? "in" : "out";
        jp["dataType"] = p.data_type;
        if (p.required) jp["required"] = true;
        j["ports"].push_back(std::move(jp));
    }
    if (c.script) j["script"] = *c.script;
    return j;
}

json connector_to_json(const Connector& k) {
    json j;
    j["id"] = k.id;
    j["source"] = to_string(k.source);
    j["target"] = to_string(k.target);
    return j;
}

json probe_to_json(const Probe& p) {
    json j;
    j["id"] = p.id;
    j["connector"] = p.connector;
    j["captures"] = json::array();
    for (Variable v : p.captures) j["captures"].push_back(to_string(v));
    return j;
}

}  // namespace

std::string ModelDiff::to_json() const {
    json j;
    j["ops"] = json::array();
    for (const auto& op : ops) {
        json jo;
        switch (op.kind) {
            case ReconfigOp::Kind::AddComponent:
                jo["op"] = "add-component";
                jo["payload"] = component_to_json(op.component);
                break;
            case ReconfigOp::Kind::RemoveComponent:
                jo["op"] = "remove-component";
                jo["payload"] = op.name;
                break;
            case ReconfigOp::Kind::AddConnector:
                jo["op"] = "add-connector";
                jo["payload"] = connector_to_json(op.connector);
                break;
            case ReconfigOp::Kind::RemoveConnector:
                jo["op"] = "remove-connector";
                jo["payload"] = op.name;
                break;
            case ReconfigOp::Kind::AttachProbe:
                jo["op"] = "attach-probe";
                jo["payload"] = probe_to_json(op.probe);
                break;
            case ReconfigOp::Kind::DetachProbe:
                jo["op"] = "detach-probe";
                jo["payload"] = op.name;
                break;
        }
        j["ops"].push_back(std::move(jo));
    }
    return j.dump(2);
}

ModelDiff diff(const DeployedModel& old_model, const DeployedModel& new_model) {
    std::map<std::string, const Component*> old_components, new_components;
    for (const auto& c : old_model.architecture.components) old_components[c.name] = &c;
    for (const auto& c : new_model.architecture.components) new_components[c.name] = &c;

    std::map<std::string, const Connector*> old_connectors, new_connectors;
    for (const auto& k : old_model.architecture.connectors) old_connectors[k.id] = &k;
    for (const auto& k : new_model.architecture.connectors) new_connectors[k.id] = &k;

    std::map<std::string, const Probe*> old_probes, new_probes;
    for (const auto& p : old_model.probes) old_probes[p.id] = &p;
    for (const auto& p : new_model.probes) new_probes[p.id] = &p;

    // Changed elements are recreated: remove + add.
    std::set<std::string> comp_removed, comp_added;
    for (const auto& [name, c] : old_components) {
        auto it = new_components.find(name);
        if (it == new_components.end() || !(*it->second == *c)) comp_removed.insert(name);
    }
    for (const auto& [name, c] : new_components) {
        auto it = old_components.find(name);
        if (it == old_components.end() || !(*it->second == *c)) comp_added.insert(name);
    }

    // A connector goes when it changed or when either endpoint component is
    // being recreated; it comes back when present in the new model.
    std::set<std::string> conn_removed, conn_added;
    for (const auto& [id, k] : old_connectors) {
        auto it = new_connectors.find(id);
        const bool changed = it == new_connectors.end() || !(*it->second == *k);
        const bool endpoint_recreated = comp_removed.count(k->source.component) ||
                                        comp_removed.count(k->target.component);
        if (changed || endpoint_recreated) conn_removed.insert(id);
    }
    for (const auto& [id, k] : new_connectors) {
        auto it = old_connectors.find(id);
        const bool changed = it == old_connectors.end() || !(*it->second == *k);
        const bool endpoint_recreated =
            comp_added.count(k->source.component) || comp_added.count(k->target.component);
        if (changed || endpoint_recreated || conn_removed.count(id)) conn_added.insert(id);
    }

    std::set<std::string> probe_detached, probe_attached;
    for (const auto& [id, p] : old_probes) {
        auto it = new_probes.find(id);
        const bool changed = it == new_probes.end() || !(*it->second == *p);
        if (changed || conn_removed.count(p->connector)) probe_detached.insert(id);
    }
    for (const auto& [id, p] : new_probes) {
        auto it = old_probes.find(id);
        const bool changed = it == old_probes.end() || !(*it->second == *p);
        if (changed || conn_added.count(p->connector) || probe_detached.count(id))
            probe_attached.insert(id);
    }

    ModelDiff result;
    for (const auto& id : probe_detached) result.ops.push_back(ReconfigOp::detach_probe(id));
    for (const auto& id : conn_removed) result.ops.push_back(ReconfigOp::remove_connector(id));
    for (const auto& name : comp_removed) result.ops.push_back(ReconfigOp::remove_component(name));
    for (const auto& name : comp_added)
        result.ops.push_back(ReconfigOp::add_component(*new_components.at(name)));
    for (const auto& id : conn_added)
        result.ops.push_back(ReconfigOp::add_connector(*new_connectors.at(id)));
    for (const auto& id : probe_attached)
        result.ops.push_back(ReconfigOp::attach_probe(*new_probes.at(id)));
    return result;
}

namespace {

void drop_dangling_contracts(Architecture& arch) {
    auto port_exists = [&](const Endpoint& e) { return arch.find_port(e) != nullptr; };

    std::erase_if(arch.structural,
                  [&](const StructuralContract& sc) { return !port_exists(sc.subject); });
    for (auto& sc : arch.structural) {
        if (!sc.allowed_clients) continue;
        std::erase_if(*sc.allowed_clients,
                      [&](const std::string& name) { return !arch.find_component(name); });
    }
    std::erase_if(arch.structural, [](const StructuralContract& sc) {
        return sc.allowed_clients && sc.allowed_clients->empty();
    });
    std::erase_if(arch.behavioral, [&](const BehavioralContract& bc) {
        return arch.find_component(bc.component) == nullptr;
    });
    std::erase_if(arch.dataflow,
                  [&](const DataflowContract& dc) { return !port_exists(dc.port); });
    std::erase_if(arch.qos, [&](const QosContract& qc) { return !port_exists(qc.port); });
}

}  // namespace

DeployedModel apply(DeployedModel base, const ModelDiff& diff) {
    Architecture& arch = base.architecture;
    auto find_component_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < arch.components.size(); ++i)
            if (arch.components[i].name == name) return static_cast<std::ptrdiff_t>(i);
        return std::ptrdiff_t{-1};
    };
    auto find_connector_index = [&](const std::string& id) {
        for (std::size_t i = 0; i < arch.connectors.size(); ++i)
            if (arch.connectors[i].id == id) return static_cast<std::ptrdiff_t>(i);
        return std::ptrdiff_t{-1};
    };
    auto find_probe_index = [&](const std::string& id) {
        for (std::size_t i = 0; i < base.probes.size(); ++i)
            if (base.probes[i].id == id) return static_cast<std::ptrdiff_t>(i);
        return std::ptrdiff_t{-1};
    };

    for (const auto& op : diff.ops) {
        switch (op.kind) {
            case ReconfigOp::Kind::DetachProbe: {
                auto i = find_probe_index(op.name);
                if (i < 0) throw std::invalid_argument("apply: unknown probe " + op.name);
                base.probes.erase(base.probes.begin() + i);
                break;
            }
            case ReconfigOp::Kind::RemoveConnector: {
                auto i = find_connector_index(op.name);
                if (i < 0) throw std::invalid_argument("apply: unknown connector " + op.name);
                for (const auto& p : base.probes)
                    if (p.connector == op.name)
                        throw std::invalid_argument("apply: probe " + p.id +
                                                    " still attached to " + op.name);
                arch.connectors.erase(arch.connectors.begin() + i);
                break;
            }
            case ReconfigOp::Kind::RemoveComponent: {
                auto i = find_component_index(op.name);
                if (i < 0) throw std::invalid_argument("apply: unknown component " + op.name);
                for (const auto& k : arch.connectors)
                    if (k.source.component == op.name || k.target.component == op.name)
                        throw std::invalid_argument("apply: component " + op.name +
                                                    " is still bound by " + k.id);
                arch.components.erase(arch.components.begin() + i);
                break;
            }
            case ReconfigOp::Kind::AddComponent: {
                if (find_component_index(op.component.name) >= 0)
                    throw std::invalid_argument("apply: duplicate component " +
                                                op.component.name);
                arch.components.push_back(op.component);
                break;
            }
            case ReconfigOp::Kind::AddConnector: {
                if (find_connector_index(op.connector.id) >= 0)
                    throw std::invalid_argument("apply: duplicate connector " + op.connector.id);
                arch.connectors.push_back(op.connector);
                break;
            }
            case ReconfigOp::Kind::AttachProbe: {
                if (find_probe_index(op.probe.id) >= 0)
                    throw std::invalid_argument("apply: duplicate probe " + op.probe.id);
                if (find_connector_index(op.probe.connector) < 0)
                    throw std::invalid_argument("apply: probe " + op.probe.id +
                                                " targets unknown connector " + op.probe.connector);
                base.probes.push_back(op.probe);
                break;
            }
        }
    }

    drop_dangling_contracts(arch);

    // Stable ordering without re-validating: apply may pass through states
    // the validator would reject, and the caller owns final validation.
    std::sort(arch.components.begin(), arch.components.end(),
              [](const Component& a, const Component& b) { return a.name < b.name; });
    std::sort(arch.connectors.begin(), arch.connectors.end(),
              [](const Connector& a, const Connector& b) { return a.id < b.id; });
    std::sort(base.probes.begin(), base.probes.end(),
              [](const Probe& a, const Probe& b) { return a.id < b.id; });
    return base;
}

EvolveOutcome evolve(RunningSystem& sys, const Architecture& new_arch,
                     std::map<std::string, BehaviorScript> scripts, const Action& default_action,
                     const std::map<std::string, Action>& overrides,
                     const AnalysisOptions& options, Trace* trace) {
    EvolveOutcome outcome;

    const Architecture canonical_new = canonicalize(new_arch);
    outcome.report = analyze(canonical_new, options);
    if (!outcome.report.gate_passed) {
        outcome.accepted = false;
        return outcome;  // the runtime view stays untouched
    }

    outcome.new_plan = plan(outcome.report, default_action, overrides);
    validate_scripts(canonical_new, scripts);

    DeployedModel current{sys.structural_view(), {}};
    for (const auto& [id, probe] : sys.probes()) current.probes.push_back(probe);
    outcome.diff = diff(current, {canonical_new, outcome.new_plan.probes});

    const bool was_running = sys.status() == RunStatus::Running;
    Trace local;
    Trace& sink = trace ? *trace : local;
    if (was_running) sys.quiesce(sink);
    try {
        sys.apply_ops(outcome.diff.ops);
    } catch (...) {
        if (was_running) sys.resume();
        throw;
    }
    sys.set_scripts(std::move(scripts));
    sys.set_name(canonical_new.name);
    if (was_running) sys.resume();

    outcome.accepted = true;
    return outcome;
}

}  // namespace calico
