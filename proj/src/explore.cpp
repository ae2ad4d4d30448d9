#include "mfgsim/explore.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "mfgsim/errors.hpp"
#include "mfgsim/policy.hpp"

namespace mfgsim {

using nlohmann::json;

namespace {

const char* kind_name(EventKind kind) {
    return kind == EventKind::transport ? "transport" : "process";
}

EventKind kind_from(const std::string& name) {
    if (name == "transport") return EventKind::transport;
    if (name == "process") return EventKind::process;
    throw SimError(ErrorCode::parse_error, "unknown event kind: " + name);
}

json event_to_json(const ProcessEvent& event) {
    json j;
    j["id"] = event.id;
    j["kind"] = kind_name(event.kind);
    j["duration"] = event.duration;
    j["params"] = json::object();
    for (const auto& [param, value] : event.params) j["params"][param] = value;
    return j;
}

json constraint_set_to_json(const ConstraintSet& constraints) {
    json j;
    j["operation_bounds"] = json::object();
    for (const auto& [param, interval] : constraints.operation_bounds) {
        j["operation_bounds"][param] = {interval.lo, interval.hi};
    }
    j["safety_limits"] = json::object();
    for (const auto& [param, interval] : constraints.safety_limits) {
        j["safety_limits"][param] = {interval.lo, interval.hi};
    }
    return j;
}

// Apply granted capabilities to a model copy. State descriptions and
// properties come from the environment model.
void apply_grant(CapabilityModel& model, const std::vector<GrantedEvent>& capabilities,
                 const EnvironmentModel& env) {
    for (const GrantedEvent& cap : capabilities) {
        for (const StateId& s : {cap.from, cap.to}) {
            if (model.states.contains(s)) continue;
            auto known = env.states.find(s);
            model.states[s] = known != env.states.end() ? known->second : PartState{s, ""};
            auto props = env.physical_props.find(s);
            if (props != env.physical_props.end()) model.physical_props[s] = props->second;
        }
        model.events[cap.event.id] = cap.event;
        model.transitions[{cap.from, cap.event.id}] = cap.to;
    }
}

}  // namespace

ExplorationContext build_exploration_context(const World& world,
                                             const Disruption& disruption,
                                             const KnowledgeSnapshot& snapshot,
                                             const ScoringConfig& scoring,
                                             int max_iterations,
                                             bool same_kind_only) {
    ExplorationContext ctx;
    ctx.disruption = disruption;
    ctx.snapshot = snapshot;
    ctx.params.constraints = world.constraints;
    ctx.params.max_iterations = max_iterations;
    ctx.scoring = scoring;

    AgentKind disrupted_kind = AgentKind::robot;
    auto disrupted = snapshot.agents.find(disruption.disrupted_agent);
    if (disrupted != snapshot.agents.end()) disrupted_kind = disrupted->second.kind;

    std::vector<GrantedEvent> grant = world.takeover_grant(disruption.disrupted_agent);

    for (const auto& [id, snap] : snapshot.agents) {
        if (id == disruption.disrupted_agent) continue;
        if (snap.status.mode != ResourceMode::operational) continue;
        if (same_kind_only && snap.kind != disrupted_kind) continue;
        CandidateInfo info;
        info.id = id;
        info.kind = snap.kind;
        info.performance = snap.performance;
        info.proximity = world.proximity_hops(id, disruption.disrupted_agent);
        info.proposed_capabilities = grant;
        auto constraints = world.constraints.find(id);
        if (constraints != world.constraints.end()) info.constraints = constraints->second;
        ctx.candidates.push_back(std::move(info));
    }
    return ctx;
}

PolicyInput build_policy_input(const ExplorationContext& ctx) {
    PolicyInput input;
    input.instructions =
        "A resource agent has broken down. Analyze the real-time data bundle and "
        "select one exploration agent to take over the disrupted capabilities. "
        "Consider availability, proximity and utilization, and keep every "
        "capability parameter inside the candidate's operational bounds and "
        "safety limits. Answer with a single document matching the template.";

    json data;
    data["disruption"]["agent"] = ctx.disruption.disrupted_agent;
    data["disruption"]["detected_at"] = ctx.disruption.detected_at;
    data["disruption"]["states"] = ctx.disruption.affected_states;
    data["disruption"]["events"] = ctx.disruption.affected_events;

    data["candidates"] = json::array();
    for (const CandidateInfo& c : ctx.candidates) {
        json j;
        j["id"] = c.id;
        j["kind"] = c.kind == AgentKind::robot ? "robot" : "machine";
        j["performance"] = {
            {"availability", c.performance.availability},
            {"breakdown", c.performance.breakdown},
            {"throughput", c.performance.throughput},
            {"utilization", c.performance.utilization},
        };
        j["proximity"] = c.proximity;
        j["proposed_capabilities"] = json::array();
        for (const GrantedEvent& cap : c.proposed_capabilities) {
            json e = event_to_json(cap.event);
            e["from"] = cap.from;
            e["to"] = cap.to;
            j["proposed_capabilities"].push_back(std::move(e));
        }
        j["constraints"] = constraint_set_to_json(c.constraints);
        data["candidates"].push_back(std::move(j));
    }

    data["product"] = json::object();
    data["product"]["parts"] = json::array();
    for (const auto& [id, part] : ctx.snapshot.parts) {
        json p;
        p["id"] = id;
        p["current_state"] = part.current_state;
        PropSet achieved = part.history.achieved_union();
        json steps = json::array();
        for (const PlanStep& step : part.plan.steps) {
            steps.push_back(json(step.props));
        }
        p["plan"] = std::move(steps);
        p["achieved"] = achieved;
        data["product"]["parts"].push_back(std::move(p));
    }

    data["environment"] = {
        {"tick", ctx.snapshot.tick},
        {"agent_count", ctx.snapshot.agents.size()},
        {"part_count", ctx.snapshot.parts.size()},
    };

    input.data_json = data.dump();
    input.template_text =
        R"({"exploration_agent": "<agent id>", "explored_capabilities": )"
        R"([{"id": "<event id>", "kind": "transport|process", "duration": <ticks>, )"
        R"("params": {"<name>": <number>}}], "rationale": "<reasoning>"})";
    return input;
}

ExplorationOutput parse_output(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SimError(ErrorCode::parse_error, e.what());
    }
    if (!doc.is_object()) {
        throw SimError(ErrorCode::parse_error, "output document is not an object");
    }
    if (!doc.contains("exploration_agent") || !doc["exploration_agent"].is_string()) {
        throw SimError(ErrorCode::parse_error, "missing exploration_agent");
    }
    if (!doc.contains("explored_capabilities") || !doc["explored_capabilities"].is_array() ||
        doc["explored_capabilities"].empty()) {
        throw SimError(ErrorCode::parse_error, "explored_capabilities missing or empty");
    }

    ExplorationOutput output;
    output.exploration_agent = doc["exploration_agent"].get<std::string>();
    for (const json& entry : doc["explored_capabilities"]) {
        if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
            throw SimError(ErrorCode::parse_error, "capability entry missing id");
        }
        ProcessEvent event;
        event.id = entry["id"].get<std::string>();
        event.kind = kind_from(entry.value("kind", std::string("transport")));
        event.duration = entry.value("duration", Tick{1});
        if (event.duration < 1) {
            throw SimError(ErrorCode::parse_error,
                           "capability " + event.id + " has non-positive duration");
        }
        if (entry.contains("params")) {
            if (!entry["params"].is_object()) {
                throw SimError(ErrorCode::parse_error,
                               "capability " + event.id + " params is not an object");
            }
            for (const auto& [param, value] : entry["params"].items()) {
                if (!value.is_number()) {
                    throw SimError(ErrorCode::parse_error,
                                   "capability " + event.id + " param " + param +
                                       " is not numeric");
                }
                event.params[param] = value.get<double>();
            }
        }
        output.explored_capabilities.push_back(std::move(event));
    }
    output.rationale = doc.value("rationale", std::string());
    return output;
}

std::string serialize_output(const ExplorationOutput& output) {
    json doc;
    doc["exploration_agent"] = output.exploration_agent;
    doc["explored_capabilities"] = json::array();
    for (const ProcessEvent& event : output.explored_capabilities) {
        doc["explored_capabilities"].push_back(event_to_json(event));
    }
    doc["rationale"] = output.rationale;
    return doc.dump();
}

std::set<StateId> takeover_marked_states(const std::vector<GrantedEvent>& capabilities,
                                         const KnowledgeSnapshot& snapshot,
                                         const AgentId& exploration_agent,
                                         const AgentId& disrupted_agent) {
    std::set<StateId> destinations;
    for (const GrantedEvent& cap : capabilities) destinations.insert(cap.to);

    std::set<StateId> handoffs;
    for (const StateId& state : destinations) {
        for (const auto& [id, snap] : snapshot.agents) {
            if (id == exploration_agent || id == disrupted_agent) continue;
            if (snap.status.mode != ResourceMode::operational) continue;
            if (snap.model.states.contains(state)) {
                handoffs.insert(state);
                break;
            }
        }
    }
    return handoffs.empty() ? destinations : handoffs;
}

namespace {

// Per-round checks after a successful parse: agent validity, constraint
// membership, and reachability of the takeover goal states.
struct RoundCheck {
    bool ok = false;
    std::string feedback;
    std::vector<GrantedEvent> resolved;
    std::set<StateId> marked;
};

RoundCheck check_round(const ExplorationOutput& output, const ExplorationContext& ctx) {
    RoundCheck result;

    const CandidateInfo* candidate = nullptr;
    for (const CandidateInfo& c : ctx.candidates) {
        if (c.id == output.exploration_agent) {
            candidate = &c;
            break;
        }
    }
    if (!candidate || !ctx.snapshot.agents.contains(output.exploration_agent)) {
        result.feedback = "Invalid agent";
        return result;
    }

    // Resolve each capability to its transition; the grant list is the only
    // source of state endpoints.
    std::vector<GrantedEvent> resolved;
    std::vector<std::string> unresolved;
    for (const ProcessEvent& event : output.explored_capabilities) {
        const GrantedEvent* match = nullptr;
        for (const GrantedEvent& cap : candidate->proposed_capabilities) {
            if (cap.event.id == event.id) {
                match = &cap;
                break;
            }
        }
        if (!match) {
            unresolved.push_back(event.id);
            continue;
        }
        GrantedEvent granted = *match;
        granted.event.params = event.params;  // policy may tune parameters
        resolved.push_back(std::move(granted));
    }
    if (!unresolved.empty()) {
        std::string names;
        for (const std::string& id : unresolved) {
            if (!names.empty()) names += ", ";
            names += id;
        }
        result.feedback = "Constraints not met: " + names;
        return result;
    }

    ConstraintSet constraints;
    auto it = ctx.params.constraints.find(output.exploration_agent);
    if (it != ctx.params.constraints.end()) constraints = it->second;

    std::set<std::string> violating;
    for (const GrantedEvent& cap : resolved) {
        for (const ConstraintViolation& v : check_constraints(constraints, cap.event)) {
            violating.insert(v.param);
        }
    }
    if (!violating.empty()) {
        std::string names;
        for (const std::string& param : violating) {
            if (!names.empty()) names += ", ";
            names += param;
        }
        result.feedback = "Constraints not met: " + names;
        return result;
    }

    // Reachability guarantee: in the would-be merged model, every granted
    // event must sit on a chain into the takeover goal states.
    std::set<StateId> marked = takeover_marked_states(
        resolved, ctx.snapshot, output.exploration_agent, ctx.disruption.disrupted_agent);
    CapabilityModel merged = ctx.snapshot.agents.at(output.exploration_agent).model;
    apply_grant(merged, resolved, EnvironmentModel{});
    merged.marked_states = marked;
    for (const GrantedEvent& cap : resolved) {
        if (marked.contains(cap.to)) continue;
        if (merged.states.contains(cap.to) && path_to_marked(merged, cap.to)) continue;
        result.feedback = "Constraints not met: " + cap.event.id +
                          " does not lead to a handoff state";
        return result;
    }

    result.ok = true;
    result.resolved = std::move(resolved);
    result.marked = std::move(marked);
    return result;
}

}  // namespace

ValidateResult validate(Policy& policy, const PolicyInput& input,
                        const ExplorationContext& ctx,
                        const std::optional<std::string>& first_response) {
    ValidateResult result;
    const int n = ctx.params.max_iterations;
    std::optional<std::string> feedback;

    int i = 0;
    while (i < n && !result.valid) {
        ++i;
        std::string response;
        if (i == 1 && first_response) {
            response = *first_response;
        } else {
            try {
                response = policy.propose(input, feedback);
            } catch (const SimError& e) {
                if (e.code() == ErrorCode::policy_unavailable) continue;
                throw;
            }
        }

        ExplorationOutput output;
        try {
            output = parse_output(response);
        } catch (const SimError& e) {
            if (e.code() != ErrorCode::parse_error) throw;
            feedback = "Syntax error";
            continue;
        }

        RoundCheck check = check_round(output, ctx);
        if (!check.ok) {
            feedback = check.feedback;
            continue;
        }
        result.valid = true;
        result.accepted = std::move(output);
        result.resolved = std::move(check.resolved);
        result.takeover_marked = std::move(check.marked);
    }
    result.rounds = i;
    result.feedback = feedback;
    return result;
}

ExploreResult explore(const ExplorationContext& ctx, Policy& policy) {
    ExploreResult result;
    if (ctx.candidates.empty()) {
        result.failure = "no eligible candidates";
        return result;
    }
    PolicyInput input = build_policy_input(ctx);
    ValidateResult v = validate(policy, input, ctx);
    result.rounds = v.rounds;
    if (!v.valid) {
        result.failure = v.feedback.value_or("no valid proposal");
        return result;
    }
    result.output = std::move(v.accepted);
    result.resolved = std::move(v.resolved);
    result.takeover_marked = std::move(v.takeover_marked);
    return result;
}

MergeRecord merge_capabilities(World& world, const AgentId& exploration_agent,
                               const Disruption& disruption,
                               const std::vector<GrantedEvent>& capabilities,
                               const std::set<StateId>& marked, Tick now) {
    MergeRecord record;
    record.disrupted_agent = disruption.disrupted_agent;
    record.exploration_agent = exploration_agent;
    record.capabilities = capabilities;
    record.marked = marked;
    record.merged_at = now;
    for (const auto& [id, agent] : world.agents) {
        record.pre_models[id] = agent.model;
        record.pre_tables[id] = agent.table;
    }
    record.pre_env = world.env;

    // Disrupted events leave the live model; the pristine snapshot keeps
    // them for the repair.
    ResourceAgent& disrupted = world.agents.at(disruption.disrupted_agent);
    for (const EventId& event : disruption.affected_events) {
        disrupted.model.events.erase(event);
    }
    std::erase_if(disrupted.model.transitions, [&](const auto& entry) {
        return disruption.affected_events.contains(entry.first.second);
    });

    ResourceAgent& explorer = world.agents.at(exploration_agent);
    apply_grant(explorer.model, capabilities, world.env);

    // Environment model: granted events are now the explorer's.
    for (const GrantedEvent& cap : capabilities) {
        for (const StateId& s : {cap.from, cap.to}) {
            if (!world.env.states.contains(s)) {
                world.env.states[s] = explorer.model.states.at(s);
                auto props = explorer.model.physical_props.find(s);
                if (props != explorer.model.physical_props.end()) {
                    world.env.physical_props[s] = props->second;
                }
            }
        }
        world.env.events[cap.event.id] = cap.event;
        world.env.transitions[{cap.from, cap.event.id}] = cap.to;
        world.env.event_owner[cap.event.id] = exploration_agent;
    }

    // Newly shared states enter the neighbor tables on every serving agent.
    std::set<StateId> touched;
    for (const GrantedEvent& cap : capabilities) {
        touched.insert(cap.from);
        touched.insert(cap.to);
    }
    for (const StateId& state : touched) {
        std::set<AgentId> serving = world.agents_serving(state);
        if (serving.size() < 2) continue;
        for (const AgentId& id : serving) {
            ResourceAgent& agent = world.agents.at(id);
            agent.model.shared_states.insert(state);
            std::set<AgentId> others = serving;
            others.erase(id);
            agent.table.entries[state] = std::move(others);
        }
    }

    record.merged_model = explorer.model;
    return record;
}

void revoke_capabilities(World& world, const MergeRecord& record) {
    for (auto& [id, agent] : world.agents) {
        auto model = record.pre_models.find(id);
        if (model != record.pre_models.end()) agent.model = model->second;
        auto table = record.pre_tables.find(id);
        if (table != record.pre_tables.end()) agent.table = table->second;
    }
    world.env = record.pre_env;
}

}  // namespace mfgsim
