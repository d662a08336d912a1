#include "calico/debugger.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "calico/adl.hpp"

namespace calico {

using nlohmann::json;

std::string to_string(OutcomeResult r) {
    switch (r) {
        case OutcomeResult::Pass: return "pass";
        case OutcomeResult::Violation: return "violation";
        case OutcomeResult::EvalError: return "error";
    }
    return "?";
}

bool predicate_holds(const ResidualPredicate& predicate, const AttrMap& captured) {
    const std::string key = to_string(predicate.variable);
    auto it = captured.find(key);
    if (it == captured.end())
        throw RuntimeError("captured variable " + key + " missing for check on " +
                           predicate.connector);
    if (predicate.variable == Variable::Type) {
        if (!std::holds_alternative<std::string>(it->second))
            throw RuntimeError("captured Type is not a token");
        return predicate.allowed.count(std::get<std::string>(it->second)) > 0;
    }
    if (!std::holds_alternative<std::int64_t>(it->second))
        throw RuntimeError("captured " + key + " is not numeric");
    const std::int64_t value = std::get<std::int64_t>(it->second);
    return value >= 0 && static_cast<Bytes>(value) <= predicate.bound;
}

std::vector<CheckOutcome> resume_checks(const ReifiedEvent& event, const DebugPlan& plan) {
    if (!plan.find_probe(event.probe))
        throw RuntimeError("event references unknown probe " + event.probe);

    std::vector<CheckOutcome> outcomes;
    for (const auto& check : plan.checks) {
        if (check.probe != event.probe) continue;
        CheckOutcome outcome;
        outcome.check = check.id;
        outcome.connector = check.predicate.connector;
        outcome.tick = event.tick;
        outcome.captured = event.captured;
        try {
            if (predicate_holds(check.predicate, event.captured)) {
                outcome.result = OutcomeResult::Pass;
            } else {
                outcome.result = OutcomeResult::Violation;
                switch (check.predicate.variable) {
                    case Variable::Size:
                        outcome.message = "data too large: Size " +
                                          attr_to_string(event.captured.at("Size")) +
                                          " exceeds " + format_size(check.predicate.bound);
                        break;
                    case Variable::Type:
                        outcome.message = "type not accepted: Type " +
                                          attr_to_string(event.captured.at("Type")) +
                                          " is outside " + check.predicate.describe();
                        break;
                    case Variable::Latency:
                        outcome.message = "latency too high: " +
                                          attr_to_string(event.captured.at("Latency")) +
                                          "ms exceeds " + std::to_string(check.predicate.bound) +
                                          "ms";
                        break;
                }
            }
        } catch (const RuntimeError& e) {
            outcome.result = OutcomeResult::EvalError;
            outcome.message = e.what();
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

std::string CheckOutcome::to_json_line() const {
    json j;
    j["check"] = check;
    j["connector"] = connector;
    j["tick"] = tick;
    json captured_json = json::object();
    for (const auto& [key, value] : captured) {
        if (std::holds_alternative<std::int64_t>(value))
            captured_json[key] = std::get<std::int64_t>(value);
        else
            captured_json[key] = std::get<std::string>(value);
    }
    j["captured"] = std::move(captured_json);
    j["result"] = to_string(result);
    j["message"] = message;
    return j.dump();
}

ActionEffect execute_action(CheckOutcome& outcome, const Action& action,
                            const ActionContext& ctx) {
    if (outcome.result != OutcomeResult::Violation)
        throw std::invalid_argument("execute_action: outcome is not a violation");

    ActionEffect effect;
    switch (action.type) {
        case ActionType::Notify: {
            std::ostringstream os;
            os << "violation: check " << outcome.check << " on connector " << outcome.connector
               << " at tick " << outcome.tick << " (" << outcome.message << "); captured:";
            for (const auto& [key, value] : outcome.captured)
                os << " " << key << "=" << attr_to_string(value);
            if (ctx.notify) ctx.notify(os.str());
            effect.description = "notified architect";
            break;
        }
        case ActionType::Log: {
            const std::filesystem::path path = ctx.root / action.target;
            std::ofstream out(path, std::ios::app);
            if (!out) throw RuntimeError("cannot open violation log " + path.string());
            out << outcome.to_json_line() << "\n";
            effect.description = "logged to " + action.target;
            break;
        }
        case ActionType::Reconfigure: {
            if (!ctx.reconfigure)
                throw RuntimeError("no reconfiguration handler available for script \"" +
                                   action.target + "\"");
            effect.reconfigure_accepted = ctx.reconfigure(action.target);
            effect.description = std::string("reconfiguration \"") + action.target + "\" " +
                                 (effect.reconfigure_accepted ? "accepted" : "rejected");
            break;
        }
    }
    outcome.action_taken = action;
    return effect;
}

}  // namespace calico
