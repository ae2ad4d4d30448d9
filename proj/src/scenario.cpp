#include "mfgsim/scenario.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mfgsim/errors.hpp"

namespace mfgsim {

using nlohmann::json;

Tick Scenario::resolve_duration(const EventDef& event) const {
    if (event.duration > 0) return event.duration;
    if (event.kind == EventKind::process) {
        auto it = process_times.find(event.process);
        if (it != process_times.end()) return it->second;
        return 0;
    }
    return options.transport_duration;
}

namespace {

[[noreturn]] void fail_parse(const std::string& message) {
    throw SimError(ErrorCode::parse_error, "scenario: " + message);
}

EventKind parse_kind(const std::string& name, const std::string& context) {
    if (name == "transport") return EventKind::transport;
    if (name == "process") return EventKind::process;
    fail_parse(context + ": unknown kind '" + name + "'");
}

AgentKind parse_agent_kind(const std::string& name, const std::string& context) {
    if (name == "robot") return AgentKind::robot;
    if (name == "machine") return AgentKind::machine;
    fail_parse(context + ": unknown agent kind '" + name + "'");
}

EventDef parse_event(const json& j, const std::string& context) {
    EventDef event;
    if (!j.contains("id")) fail_parse(context + ": event without id");
    event.id = j.at("id").get<std::string>();
    event.kind = parse_kind(j.value("kind", std::string("transport")), event.id);
    event.duration = j.value("duration", Tick{0});
    event.process = j.value("process", std::string());
    if (!j.contains("from") || !j.contains("to")) {
        fail_parse(context + ": event " + event.id + " missing from/to");
    }
    event.from = j.at("from").get<std::string>();
    event.to = j.at("to").get<std::string>();
    if (j.contains("params")) {
        for (const auto& [param, value] : j.at("params").items()) {
            event.params[param] = value.get<double>();
        }
    }
    return event;
}

json event_to_json(const EventDef& event) {
    json j;
    j["id"] = event.id;
    j["kind"] = event.kind == EventKind::transport ? "transport" : "process";
    if (event.duration > 0) j["duration"] = event.duration;
    if (!event.process.empty()) j["process"] = event.process;
    j["from"] = event.from;
    j["to"] = event.to;
    if (!event.params.empty()) j["params"] = event.params;
    return j;
}

ConstraintSet parse_constraints(const json& j, const std::string& agent) {
    ConstraintSet set;
    auto read = [&](const char* key, std::map<std::string, Interval>& target) {
        if (!j.contains(key)) return;
        for (const auto& [param, bounds] : j.at(key).items()) {
            if (!bounds.is_array() || bounds.size() != 2) {
                fail_parse("constraints for " + agent + ": " + param +
                           " must be [min, max]");
            }
            target[param] = {bounds[0].get<double>(), bounds[1].get<double>()};
        }
    };
    read("operation_bounds", set.operation_bounds);
    read("safety_limits", set.safety_limits);
    return set;
}

// Expand a "topology" section (buffers, stations, robots) into explicit
// states and agents. Stations become machine agents with an in/out state
// pair; robots become transport agents moving parts between any pickup
// point (buffer or station output) and any dropoff (buffer or station
// input) they serve.
void expand_topology(const json& topo, Scenario& scenario) {
    struct Station {
        std::string id;
        std::string process;
        std::map<std::string, double> params;
    };
    std::vector<Station> stations;
    for (const json& j : topo.value("stations", json::array())) {
        Station st;
        st.id = j.at("id").get<std::string>();
        st.process = j.at("process").get<std::string>();
        if (j.contains("params")) {
            for (const auto& [param, value] : j.at("params").items()) {
                st.params[param] = value.get<double>();
            }
        }
        stations.push_back(std::move(st));
    }

    std::vector<std::string> buffer_order;
    for (const json& j : topo.value("buffers", json::array())) {
        std::string id = j.at("id").get<std::string>();
        buffer_order.push_back(id);
        scenario.states.push_back({id, "buffer " + id, {}, ""});
    }

    for (const Station& st : stations) {
        scenario.states.push_back({st.id + ".in", "at " + st.id + " input", {}, st.id});
        scenario.states.push_back(
            {st.id + ".out", "processed " + st.process + " at " + st.id,
             {st.process}, st.id});

        AgentDef machine;
        machine.id = st.id;
        machine.kind = AgentKind::machine;
        machine.states = {st.id + ".in", st.id + ".out"};
        EventDef op;
        op.id = "op:" + st.id;
        op.kind = EventKind::process;
        op.process = st.process;
        op.from = st.id + ".in";
        op.to = st.id + ".out";
        op.params = st.params;
        machine.events.push_back(std::move(op));
        scenario.agents.push_back(std::move(machine));
    }

    for (const json& j : topo.value("robots", json::array())) {
        AgentDef robot;
        robot.id = j.at("id").get<std::string>();
        robot.kind = AgentKind::robot;
        Tick move_duration = j.value("move_duration", Tick{0});
        std::map<std::string, double> params;
        if (j.contains("params")) {
            for (const auto& [param, value] : j.at("params").items()) {
                params[param] = value.get<double>();
            }
        }

        std::vector<StateId> pickups;
        std::vector<StateId> dropoffs;
        for (const json& buffer : j.value("serves", json::array())) {
            StateId id = buffer.get<std::string>();
            robot.states.push_back(id);
            pickups.push_back(id);
            dropoffs.push_back(id);
        }
        for (const json& station : j.value("stations", json::array())) {
            std::string id = station.get<std::string>();
            robot.states.push_back(id + ".in");
            robot.states.push_back(id + ".out");
            pickups.push_back(id + ".out");
            dropoffs.push_back(id + ".in");
        }

        for (const StateId& src : pickups) {
            for (const StateId& dst : dropoffs) {
                if (src == dst) continue;
                EventDef move;
                move.id = "mv:" + robot.id + ":" + src + ">" + dst;
                move.kind = EventKind::transport;
                move.duration = move_duration;
                move.from = src;
                move.to = dst;
                move.params = params;
                robot.events.push_back(std::move(move));
            }
        }
        scenario.agents.push_back(std::move(robot));
    }

    // Buffer owner: first declared robot serving it.
    for (StateDef& state : scenario.states) {
        if (!state.owner.empty()) continue;
        for (const AgentDef& agent : scenario.agents) {
            if (agent.kind != AgentKind::robot) continue;
            if (std::find(agent.states.begin(), agent.states.end(), state.id) !=
                agent.states.end()) {
                state.owner = agent.id;
                break;
            }
        }
    }
}

void normalize(Scenario& scenario) {
    std::sort(scenario.states.begin(), scenario.states.end(),
              [](const StateDef& a, const StateDef& b) { return a.id < b.id; });
    std::sort(scenario.agents.begin(), scenario.agents.end(),
              [](const AgentDef& a, const AgentDef& b) { return a.id < b.id; });
    for (AgentDef& agent : scenario.agents) {
        std::sort(agent.states.begin(), agent.states.end());
        std::sort(agent.events.begin(), agent.events.end(),
                  [](const EventDef& a, const EventDef& b) { return a.id < b.id; });
    }
}

}  // namespace

Scenario load_scenario_text(const std::string& text, const std::string& fallback_name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail_parse(e.what());
    }
    if (!doc.is_object()) fail_parse("document is not an object");

    Scenario scenario;
    try {
        scenario.schema_version = doc.value("schema_version", 0);
        scenario.name = doc.value("name", fallback_name);

        if (doc.contains("options")) {
            const json& o = doc.at("options");
            ScenarioOptions& opt = scenario.options;
            opt.horizon = o.value("horizon", opt.horizon);
            opt.exploration = o.value("exploration", opt.exploration);
            opt.transport_duration = o.value("transport_duration", opt.transport_duration);
            opt.retry_limit = o.value("retry_limit", opt.retry_limit);
            opt.window = o.value("window", opt.window);
            opt.stride = o.value("stride", opt.stride);
            opt.max_iterations = o.value("max_iterations", opt.max_iterations);
            opt.same_kind_candidates =
                o.value("same_kind_candidates", opt.same_kind_candidates);
            opt.utilization_complement =
                o.value("utilization_complement", opt.utilization_complement);
            opt.seed = o.value("seed", opt.seed);
        }

        if (doc.contains("policy")) {
            const json& p = doc.at("policy");
            scenario.policy.type = p.value("type", std::string("builtin"));
            scenario.policy.service_url = p.value("service_url", std::string());
            scenario.policy.timeout_seconds = p.value("timeout_seconds", 30);
            if (p.contains("weights")) {
                for (const auto& [factor, w] : p.at("weights").items()) {
                    scenario.policy.weights[factor] = w.get<double>();
                }
            }
        }

        const json process_times = doc.value("process_times", json::object());
        for (const auto& [process, ticks] : process_times.items()) {
            scenario.process_times[process] = ticks.get<Tick>();
        }
        for (const json& p : doc.value("param_vocab", json::array())) {
            scenario.param_vocab.insert(p.get<std::string>());
        }
        for (const json& p : doc.value("non_physical_props", json::array())) {
            scenario.non_physical_props.insert(p.get<std::string>());
        }

        for (const json& j : doc.value("states", json::array())) {
            StateDef state;
            state.id = j.at("id").get<std::string>();
            state.description = j.value("description", std::string());
            for (const json& p : j.value("props", json::array())) {
                state.props.insert(p.get<std::string>());
            }
            state.owner = j.value("owner", std::string());
            scenario.states.push_back(std::move(state));
        }

        for (const json& j : doc.value("agents", json::array())) {
            AgentDef agent;
            agent.id = j.at("id").get<std::string>();
            agent.kind = parse_agent_kind(j.value("kind", std::string("robot")), agent.id);
            for (const json& s : j.value("states", json::array())) {
                agent.states.push_back(s.get<std::string>());
            }
            for (const json& e : j.value("events", json::array())) {
                agent.events.push_back(parse_event(e, agent.id));
            }
            scenario.agents.push_back(std::move(agent));
        }

        if (doc.contains("topology")) expand_topology(doc.at("topology"), scenario);

        const json constraints = doc.value("constraints", json::object());
        for (const auto& [agent, j] : constraints.items()) {
            scenario.constraints[agent] = parse_constraints(j, agent);
        }

        const json grants = doc.value("grants", json::object());
        for (const auto& [agent, caps] : grants.items()) {
            for (const json& e : caps) {
                scenario.grants[agent].push_back(parse_event(e, "grant for " + agent));
            }
        }

        const json capacity = doc.value("buffer_capacity", json::object());
        for (const auto& [state, limit] : capacity.items()) {
            scenario.buffer_capacity[state] = limit.get<int>();
        }

        for (const json& j : doc.value("plan", json::array())) {
            PlanStep step;
            for (const json& p : j.at("props")) step.props.insert(p.get<std::string>());
            for (const PropId& prop : step.props) {
                if (scenario.non_physical_props.contains(prop)) {
                    step.non_physical.insert(prop);
                }
            }
            scenario.plan.steps.push_back(std::move(step));
        }

        for (const json& j : doc.value("release", json::array())) {
            ReleaseEntry entry;
            entry.count = j.value("count", 1);
            entry.tick = j.value("tick", Tick{0});
            entry.state = j.at("state").get<std::string>();
            entry.prefix = j.value("prefix", std::string("P"));
            scenario.release.push_back(std::move(entry));
        }

        for (const json& j : doc.value("schedule", json::array())) {
            DisruptionEntry entry;
            entry.agent = j.at("agent").get<std::string>();
            entry.breakdown_tick = j.at("tick").get<Tick>();
            entry.mttr = j.at("mttr").get<Tick>();
            scenario.schedule.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        fail_parse(e.what());
    }

    normalize(scenario);

    std::vector<std::string> problems = validate_scenario(scenario);
    if (!problems.empty()) {
        std::string message = "scenario '" + scenario.name + "' invalid:";
        for (const std::string& p : problems) message += "\n  - " + p;
        throw SimError(ErrorCode::validation_error, message);
    }
    return scenario;
}

Scenario load_scenario(const std::string& path_or_name) {
    if (std::filesystem::exists(path_or_name)) {
        std::ifstream in(path_or_name);
        if (!in) {
            throw SimError(ErrorCode::io_error, "cannot read " + path_or_name);
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return load_scenario_text(buffer.str(),
                                  std::filesystem::path(path_or_name).stem().string());
    }
    if (auto text = bundled_scenario_text(path_or_name)) {
        return load_scenario_text(*text, path_or_name);
    }
    throw SimError(ErrorCode::io_error,
                   "scenario '" + path_or_name + "' is neither a file nor a bundled name");
}

std::string save_scenario(const Scenario& scenario) {
    json doc;
    doc["schema_version"] = scenario.schema_version;
    doc["name"] = scenario.name;
    doc["options"] = {
        {"horizon", scenario.options.horizon},
        {"exploration", scenario.options.exploration},
        {"transport_duration", scenario.options.transport_duration},
        {"retry_limit", scenario.options.retry_limit},
        {"window", scenario.options.window},
        {"stride", scenario.options.stride},
        {"max_iterations", scenario.options.max_iterations},
        {"same_kind_candidates", scenario.options.same_kind_candidates},
        {"utilization_complement", scenario.options.utilization_complement},
        {"seed", scenario.options.seed},
    };
    doc["policy"] = {{"type", scenario.policy.type},
                     {"timeout_seconds", scenario.policy.timeout_seconds}};
    if (!scenario.policy.service_url.empty()) {
        doc["policy"]["service_url"] = scenario.policy.service_url;
    }
    if (!scenario.policy.weights.empty()) {
        doc["policy"]["weights"] = scenario.policy.weights;
    }
    doc["process_times"] = scenario.process_times;
    doc["param_vocab"] = scenario.param_vocab;
    doc["non_physical_props"] = scenario.non_physical_props;

    doc["states"] = json::array();
    for (const StateDef& state : scenario.states) {
        json j;
        j["id"] = state.id;
        if (!state.description.empty()) j["description"] = state.description;
        if (!state.props.empty()) j["props"] = state.props;
        if (!state.owner.empty()) j["owner"] = state.owner;
        doc["states"].push_back(std::move(j));
    }

    doc["agents"] = json::array();
    for (const AgentDef& agent : scenario.agents) {
        json j;
        j["id"] = agent.id;
        j["kind"] = agent.kind == AgentKind::robot ? "robot" : "machine";
        j["states"] = agent.states;
        j["events"] = json::array();
        for (const EventDef& event : agent.events) {
            j["events"].push_back(event_to_json(event));
        }
        doc["agents"].push_back(std::move(j));
    }

    doc["constraints"] = json::object();
    for (const auto& [agent, set] : scenario.constraints) {
        json j;
        for (const auto& [param, i] : set.operation_bounds) {
            j["operation_bounds"][param] = {i.lo, i.hi};
        }
        for (const auto& [param, i] : set.safety_limits) {
            j["safety_limits"][param] = {i.lo, i.hi};
        }
        doc["constraints"][agent] = std::move(j);
    }

    if (!scenario.grants.empty()) {
        doc["grants"] = json::object();
        for (const auto& [agent, caps] : scenario.grants) {
            doc["grants"][agent] = json::array();
            for (const EventDef& event : caps) {
                doc["grants"][agent].push_back(event_to_json(event));
            }
        }
    }

    if (!scenario.buffer_capacity.empty()) {
        doc["buffer_capacity"] = scenario.buffer_capacity;
    }

    doc["plan"] = json::array();
    for (const PlanStep& step : scenario.plan.steps) {
        doc["plan"].push_back({{"props", step.props}});
    }

    doc["release"] = json::array();
    for (const ReleaseEntry& entry : scenario.release) {
        doc["release"].push_back({{"count", entry.count},
                                  {"tick", entry.tick},
                                  {"state", entry.state},
                                  {"prefix", entry.prefix}});
    }

    doc["schedule"] = json::array();
    for (const DisruptionEntry& entry : scenario.schedule.entries) {
        doc["schedule"].push_back({{"agent", entry.agent},
                                   {"tick", entry.breakdown_tick},
                                   {"mttr", entry.mttr}});
    }
    return doc.dump(2);
}

std::vector<std::string> validate_scenario(const Scenario& scenario) {
    std::vector<std::string> problems;
    auto flag = [&](const std::string& message) { problems.push_back(message); };

    if (scenario.schema_version != 1) {
        flag("unsupported schema_version " + std::to_string(scenario.schema_version));
    }
    if (scenario.name.empty()) flag("missing name");
    if (scenario.options.transport_duration < 1) flag("transport_duration below 1");
    if (scenario.options.retry_limit < 1) flag("retry_limit below 1");
    if (scenario.options.window < 1) flag("window below 1");
    if (scenario.options.stride < 1) flag("stride below 1");
    if (scenario.options.max_iterations < 1) flag("max_iterations below 1");
    if (scenario.policy.type != "builtin" && scenario.policy.type != "service") {
        flag("policy type must be builtin or service: " + scenario.policy.type);
    }

    std::set<StateId> state_ids;
    for (const StateDef& state : scenario.states) {
        if (!state_ids.insert(state.id).second) flag("duplicate state " + state.id);
    }

    std::set<AgentId> agent_ids;
    std::map<EventId, AgentId> event_owner;
    for (const AgentDef& agent : scenario.agents) {
        if (!agent_ids.insert(agent.id).second) flag("duplicate agent " + agent.id);
        for (const StateId& s : agent.states) {
            if (!state_ids.contains(s)) {
                flag("agent " + agent.id + " references undeclared state " + s);
            }
        }
        std::set<StateId> own(agent.states.begin(), agent.states.end());
        for (const EventDef& event : agent.events) {
            auto [it, fresh] = event_owner.emplace(event.id, agent.id);
            if (!fresh) {
                flag("event " + event.id + " declared by both " + it->second + " and " +
                     agent.id);
            }
            if (!own.contains(event.from) || !own.contains(event.to)) {
                flag("event " + event.id + " endpoints outside agent " + agent.id);
            }
            if (scenario.resolve_duration(event) < 1) {
                flag("event " + event.id + " has unresolved or non-positive duration");
            }
            if (!scenario.param_vocab.empty()) {
                for (const auto& [param, _] : event.params) {
                    if (!scenario.param_vocab.contains(param)) {
                        flag("event " + event.id + " param " + param +
                             " outside declared vocabulary");
                    }
                }
            }
        }
    }

    for (const StateDef& state : scenario.states) {
        if (!state.owner.empty() && !agent_ids.contains(state.owner)) {
            flag("state " + state.id + " owned by undeclared agent " + state.owner);
        }
    }

    for (const auto& [agent, set] : scenario.constraints) {
        if (!agent_ids.contains(agent)) {
            flag("constraints for undeclared agent " + agent);
        }
        for (const auto& [param, interval] : set.operation_bounds) {
            if (interval.lo > interval.hi) {
                flag("operation bound " + param + " of " + agent + " has min > max");
            }
        }
        for (const auto& [param, interval] : set.safety_limits) {
            if (interval.lo > interval.hi) {
                flag("safety limit " + param + " of " + agent + " has min > max");
            }
        }
    }

    for (const auto& [agent, caps] : scenario.grants) {
        if (!agent_ids.contains(agent)) flag("grant for undeclared agent " + agent);
        for (const EventDef& event : caps) {
            if (!state_ids.contains(event.from) || !state_ids.contains(event.to)) {
                flag("grant event " + event.id + " endpoints undeclared");
            }
            if (scenario.resolve_duration(event) < 1) {
                flag("grant event " + event.id + " has unresolved duration");
            }
            auto owner = event_owner.find(event.id);
            if (owner != event_owner.end() && owner->second != agent) {
                flag("grant event " + event.id + " collides with " + owner->second);
            }
        }
    }

    for (const auto& [state, limit] : scenario.buffer_capacity) {
        if (!state_ids.contains(state)) {
            flag("buffer capacity names undeclared state " + state);
        }
        if (limit < 1) flag("buffer capacity of " + state + " below 1");
    }

    if (scenario.plan.steps.empty()) flag("plan is empty");
    for (std::size_t i = 0; i < scenario.plan.steps.size(); ++i) {
        const PlanStep& step = scenario.plan.steps[i];
        if (step.props.empty()) {
            flag("plan step " + std::to_string(i + 1) + " is empty");
            continue;
        }
        bool satisfiable = false;
        for (const StateDef& state : scenario.states) {
            PropSet have = state.props;
            have.insert(loc_prop(state.id));
            if (std::includes(have.begin(), have.end(), step.props.begin(),
                              step.props.end())) {
                satisfiable = true;
                break;
            }
        }
        if (!satisfiable) {
            flag("plan step " + std::to_string(i + 1) + " satisfied by no state");
        }
    }

    for (const ReleaseEntry& entry : scenario.release) {
        if (entry.count < 1) flag("release count below 1");
        if (entry.tick < 0) flag("release tick negative");
        if (!state_ids.contains(entry.state)) {
            flag("release state " + entry.state + " undeclared");
        }
    }

    const auto& entries = scenario.schedule.entries;
    for (const DisruptionEntry& entry : entries) {
        if (!agent_ids.contains(entry.agent)) {
            flag("schedule names undeclared agent " + entry.agent);
        }
        if (entry.breakdown_tick < 0) flag("breakdown tick negative for " + entry.agent);
        if (entry.mttr < 1) flag("mttr below 1 for " + entry.agent);
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            Tick a0 = entries[i].breakdown_tick, a1 = a0 + entries[i].mttr;
            Tick b0 = entries[j].breakdown_tick, b1 = b0 + entries[j].mttr;
            if (a0 < b1 && b0 < a1) {
                flag("overlapping disruption windows for " + entries[i].agent + " and " +
                     entries[j].agent + " (simultaneous breakdowns are not supported)");
            }
        }
    }

    // Facility connectivity over shared states.
    if (!scenario.agents.empty()) {
        std::map<StateId, std::set<AgentId>> serving;
        for (const AgentDef& agent : scenario.agents) {
            for (const StateId& s : agent.states) serving[s].insert(agent.id);
        }
        std::map<AgentId, std::set<AgentId>> adjacency;
        for (const auto& [state, ids] : serving) {
            for (const AgentId& a : ids) {
                for (const AgentId& b : ids) {
                    if (a != b) adjacency[a].insert(b);
                }
            }
        }
        std::set<AgentId> seen{scenario.agents.front().id};
        std::deque<AgentId> frontier{scenario.agents.front().id};
        while (!frontier.empty()) {
            AgentId cur = frontier.front();
            frontier.pop_front();
            for (const AgentId& next : adjacency[cur]) {
                if (seen.insert(next).second) frontier.push_back(next);
            }
        }
        for (const AgentDef& agent : scenario.agents) {
            if (!seen.contains(agent.id)) {
                flag("facility graph disconnected at " + agent.id);
            }
        }
    }

    return problems;
}

World build_world(const Scenario& scenario) {
    World world;
    world.constraints = scenario.constraints;
    world.non_physical_props = scenario.non_physical_props;

    std::map<StateId, StateDef> state_defs;
    for (const StateDef& state : scenario.states) {
        state_defs[state.id] = state;
        if (!state.owner.empty()) world.declared_owner[state.id] = state.owner;
        world.env.states[state.id] = {state.id, state.description};
        if (!state.props.empty()) world.env.physical_props[state.id] = state.props;
    }

    for (const AgentDef& def : scenario.agents) {
        ResourceAgent agent;
        agent.id = def.id;
        agent.kind = def.kind;
        for (const StateId& s : def.states) {
            const StateDef& sd = state_defs.at(s);
            agent.model.states[s] = {s, sd.description};
            if (!sd.props.empty()) agent.model.physical_props[s] = sd.props;
        }
        for (const EventDef& e : def.events) {
            ProcessEvent event;
            event.id = e.id;
            event.kind = e.kind;
            event.duration = scenario.resolve_duration(e);
            event.params = e.params;
            agent.model.events[e.id] = event;
            agent.model.transitions[{e.from, e.id}] = e.to;

            world.env.events[e.id] = event;
            world.env.transitions[{e.from, e.id}] = e.to;
            world.env.event_owner[e.id] = def.id;
        }
        if (!agent.model.states.empty()) {
            agent.model.initial_state = agent.model.states.begin()->first;
        }
        world.agents.emplace(def.id, std::move(agent));
    }

    if (!world.env.states.empty()) {
        world.env.current_state = world.env.states.begin()->first;
    }

    // Shared states and seeded neighbor tables.
    std::map<StateId, std::set<AgentId>> serving;
    for (const auto& [id, agent] : world.agents) {
        for (const auto& [state, _] : agent.model.states) serving[state].insert(id);
    }
    for (const auto& [state, ids] : serving) {
        if (ids.size() < 2) continue;
        for (const AgentId& id : ids) {
            ResourceAgent& agent = world.agents.at(id);
            agent.model.shared_states.insert(state);
            std::set<AgentId> others = ids;
            others.erase(id);
            agent.table.entries[state] = std::move(others);
        }
    }

    for (auto& [id, agent] : world.agents) {
        agent.pristine_model = agent.model;
        agent.pristine_table = agent.table;
    }

    // Takeover grants declared by the scenario.
    for (const auto& [agent, caps] : scenario.grants) {
        std::vector<GrantedEvent> resolved;
        for (const EventDef& e : caps) {
            ProcessEvent event;
            event.id = e.id;
            event.kind = e.kind;
            event.duration = scenario.resolve_duration(e);
            event.params = e.params;
            resolved.push_back({std::move(event), e.from, e.to});
        }
        world.grants[agent] = std::move(resolved);
    }

    return world;
}

}  // namespace mfgsim
