#include "calico/plan.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace calico {

using nlohmann::json;

const Probe* DebugPlan::find_probe(const std::string& id) const {
    for (const auto& p : probes)
        if (p.id == id) return &p;
    return nullptr;
}

namespace {

json action_to_json(const Action& a) {
    json j;
    switch (a.type) {
        case ActionType::Notify:
            j["kind"] = "Notify";
            break;
        case ActionType::Log:
            j["kind"] = "Log";
            j["file"] = a.target;
            break;
        case ActionType::Reconfigure:
            j["kind"] = "Reconfigure";
            j["script"] = a.target;
            break;
    }
    return j;
}

Action action_from_json(const json& j) {
    Action a;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "Notify") {
        a.type = ActionType::Notify;
    } else if (kind == "Log") {
        a.type = ActionType::Log;
        a.target = j.at("file").get<std::string>();
    } else if (kind == "Reconfigure") {
        a.type = ActionType::Reconfigure;
        a.target = j.at("script").get<std::string>();
    } else {
        throw std::invalid_argument("unknown action kind: " + kind);
    }
    return a;
}

std::string variable_slug(Variable v) {
    switch (v) {
        case Variable::Size: return "size";
        case Variable::Type: return "type";
        case Variable::Latency: return "latency";
    }
    return "?";
}

Variable variable_from_name(const std::string& name) {
    if (name == "Size") return Variable::Size;
    if (name == "Type") return Variable::Type;
    if (name == "Latency") return Variable::Latency;
    throw std::invalid_argument("unknown capture variable: " + name);
}

}  // namespace

std::string to_json_string(const Action& action) { return action_to_json(action).dump(); }

Action action_from_json_string(const std::string& text) {
    return action_from_json(json::parse(text));
}

DebugPlan plan(const AnalysisReport& report, const Action& defaults,
               const std::map<std::string, Action>& overrides) {
    for (const auto& v : report.verdicts)
        if (v.kind == VerdictKind::Incompatible)
            throw std::invalid_argument(
                "plan: report carries an Incompatible verdict (" + v.subject + "); " +
                "the gate must pass before planning runtime checks");

    // All residuals, in report order, grouped per connector.
    std::map<std::string, std::vector<const ResidualPredicate*>> per_connector;
    for (const auto& v : report.verdicts)
        for (const auto& r : v.residuals) per_connector[r.connector].push_back(&r);

    DebugPlan result;
    for (const auto& [connector, residuals] : per_connector) {
        Probe probe;
        probe.id = "probe-" + connector;
        probe.connector = connector;
        for (const ResidualPredicate* r : residuals) probe.captures.insert(r->variable);
        result.probes.push_back(std::move(probe));

        // Deterministic check ids; duplicate (connector, variable) pairs are
        // disambiguated with a numeric suffix.
        std::vector<const ResidualPredicate*> ordered = residuals;
        std::sort(ordered.begin(), ordered.end(),
                  [](const ResidualPredicate* a, const ResidualPredicate* b) {
                      return std::tie(a->variable, a->bound, a->allowed) <
                             std::tie(b->variable, b->bound, b->allowed);
                  });
        ordered.erase(std::unique(ordered.begin(), ordered.end(),
                                  [](const ResidualPredicate* a, const ResidualPredicate* b) {
                                      return *a == *b;
                                  }),
                      ordered.end());
        std::map<std::string, int> used;
        for (const ResidualPredicate* r : ordered) {
            std::string base = "check-" + connector + "-" + variable_slug(r->variable);
            int n = ++used[base];
            ResidualCheck check;
            check.id = n == 1 ? base : base + "-" + std::to_string(n);
            check.probe = "probe-" + connector;
            check.predicate = *r;
            auto it = overrides.find(check.id);
            check.action = it != overrides.end() ? it->second : defaults;
            result.checks.push_back(std::move(check));
        }
    }
    return result;
}

DeploymentConfig weave(const DebugPlan& plan, const Architecture& arch) {
    DeploymentConfig config;
    for (const auto& probe : plan.probes) {
        const Connector* k = arch.find_connector(probe.connector);
        if (!k)
            throw std::invalid_argument("weave: probe " + probe.id +
                                        " references unknown connector " + probe.connector);
        config.points.push_back({probe, k->target});
    }
    std::sort(config.points.begin(), config.points.end(),
              [](const InterceptionPoint& a, const InterceptionPoint& b) {
                  return a.probe.connector < b.probe.connector;
              });
    return config;
}

std::string DebugPlan::to_json() const {
    json j;
    j["probes"] = json::array();
    for (const auto& p : probes) {
        json jp;
        jp["id"] = p.id;
        jp["connector"] = p.connector;
        jp["captures"] = json::array();
        for (Variable v : p.captures) jp["captures"].push_back(to_string(v));
        j["probes"].push_back(std::move(jp));
    }
    j["checks"] = json::array();
    for (const auto& c : checks) {
        json jc;
        jc["id"] = c.id;
        jc["probe"] = c.probe;
        jc["predicate"] = residual_to_json(c.predicate);
        jc["action"] = action_to_json(c.action);
        j["checks"].push_back(std::move(jc));
    }
    return j.dump(2);
}

DebugPlan DebugPlan::from_json(const std::string& text) {
    const json j = json::parse(text);
    DebugPlan plan;
    for (const auto& jp : j.at("probes")) {
        Probe p;
        p.id = jp.at("id").get<std::string>();
        p.connector = jp.at("connector").get<std::string>();
        for (const auto& v : jp.at("captures"))
            p.captures.insert(variable_from_name(v.get<std::string>()));
        plan.probes.push_back(std::move(p));
    }
    for (const auto& jc : j.at("checks")) {
        ResidualCheck c;
        c.id = jc.at("id").get<std::string>();
        c.probe = jc.at("probe").get<std::string>();
        c.predicate = residual_from_json(jc.at("predicate"));
        c.action = action_from_json(jc.at("action"));
        plan.checks.push_back(std::move(c));
    }
    return plan;
}

}  // namespace calico
