#include "mfgsim/model.hpp"

#include <algorithm>
#include <deque>

#include "mfgsim/errors.hpp"

namespace mfgsim {

PropSet ProductHistory::achieved_union() const {
    PropSet all;
    for (const auto& [state, props] : achieved_props) {
        all.insert(props.begin(), props.end());
    }
    return all;
}

StateId apply_transition(const CapabilityModel& model, const StateId& state,
                         const EventId& event) {
    if (!model.states.contains(state)) {
        throw SimError(ErrorCode::unknown_state, "unknown state: " + state);
    }
    if (!model.events.contains(event)) {
        throw SimError(ErrorCode::unknown_event, "unknown event: " + event);
    }
    auto it = model.transitions.find({state, event});
    if (it == model.transitions.end()) {
        throw SimError(ErrorCode::undefined_transition,
                       "no transition for (" + state + ", " + event + ")");
    }
    return it->second;
}

namespace {

// Shared BFS core. Adjacency is rebuilt per call; model sizes here are tens
// of states, so a cached index is not worth the invalidation bookkeeping.
struct Edge {
    EventId event;
    StateId to;
};

std::optional<std::vector<EventId>> bfs_path(
    const std::map<StateId, std::vector<Edge>>& adjacency, const StateId& from,
    const std::function<bool(const StateId&)>& is_goal) {
    if (is_goal(from)) return std::vector<EventId>{};

    std::map<StateId, std::pair<StateId, EventId>> parent;  // state -> (prev, via)
    std::deque<StateId> frontier{from};
    parent[from] = {from, ""};

    while (!frontier.empty()) {
        StateId cur = frontier.front();
        frontier.pop_front();
        auto adj = adjacency.find(cur);
        if (adj == adjacency.end()) continue;
        for (const Edge& e : adj->second) {
            if (parent.contains(e.to)) continue;
            parent[e.to] = {cur, e.event};
            if (is_goal(e.to)) {
                std::vector<EventId> path;
                StateId s = e.to;
                while (s != from) {
                    auto& [prev, via] = parent[s];
                    path.push_back(via);
                    s = prev;
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            frontier.push_back(e.to);
        }
    }
    return std::nullopt;
}

// Edges sorted by event id so BFS visits ties in lexicographic order,
// making the returned path deterministic.
template <typename TransitionMap, typename UsableFn>
std::map<StateId, std::vector<Edge>> build_adjacency(const TransitionMap& transitions,
                                                     UsableFn usable) {
    std::map<StateId, std::vector<Edge>> adjacency;
    for (const auto& [key, to] : transitions) {
        const auto& [src, event] = key;
        if (!usable(event)) continue;
        adjacency[src].push_back({event, to});
    }
    for (auto& [src, edges] : adjacency) {
        std::sort(edges.begin(), edges.end(),
                  [](const Edge& a, const Edge& b) { return a.event < b.event; });
    }
    return adjacency;
}

}  // namespace

std::optional<std::vector<EventId>> path_to_marked(const CapabilityModel& model,
                                                   const StateId& from) {
    if (!model.states.contains(from)) {
        throw SimError(ErrorCode::unknown_state, "unknown state: " + from);
    }
    auto adjacency = build_adjacency(model.transitions, [](const EventId&) { return true; });
    return bfs_path(adjacency, from, [&](const StateId& s) {
        return model.marked_states.contains(s);
    });
}

std::optional<std::vector<EventId>> find_path(
    const EnvironmentModel& env, const StateId& from, const std::set<StateId>& goals,
    const std::function<bool(const EventId&)>& usable) {
    if (!env.states.contains(from)) {
        throw SimError(ErrorCode::unknown_state, "unknown state: " + from);
    }
    auto adjacency = build_adjacency(
        env.transitions, [&](const EventId& e) { return !usable || usable(e); });
    return bfs_path(adjacency, from,
                    [&](const StateId& s) { return goals.contains(s); });
}

std::set<AgentId> neighbor_lookup(const NeighborTable& table, const StateId& state) {
    auto it = table.entries.find(state);
    if (it == table.entries.end()) return {};
    return it->second;
}

std::vector<ModelViolation> validate_model(const CapabilityModel& model) {
    std::vector<ModelViolation> violations;
    auto has_state = [&](const StateId& s) { return model.states.contains(s); };

    if (!has_state(model.initial_state)) {
        violations.push_back({model.initial_state, "initial state not in state set"});
    }
    for (const auto& s : model.marked_states) {
        if (!has_state(s)) violations.push_back({s, "marked state not in state set"});
    }
    for (const auto& s : model.shared_states) {
        if (!has_state(s)) violations.push_back({s, "shared state not in state set"});
    }
    for (const auto& [key, to] : model.transitions) {
        const auto& [src, event] = key;
        if (!has_state(src)) {
            violations.push_back({src, "transition source not in state set"});
        }
        if (!has_state(to)) {
            violations.push_back({to, "transition target not in state set"});
        }
        if (!model.events.contains(event)) {
            violations.push_back({event, "transition event not in event set"});
        }
    }
    for (const auto& [event, def] : model.events) {
        if (def.duration < 1) {
            violations.push_back({event, "event duration below one tick"});
        }
    }
    return violations;
}

PropSet state_props(const std::map<StateId, PropSet>& physical_props,
                    const StateId& state) {
    PropSet props;
    auto it = physical_props.find(state);
    if (it != physical_props.end()) props = it->second;
    props.insert(loc_prop(state));
    return props;
}

bool props_satisfy(const std::map<StateId, PropSet>& physical_props,
                   const StateId& state, const PropSet& required) {
    PropSet have = state_props(physical_props, state);
    return std::includes(have.begin(), have.end(), required.begin(), required.end());
}

}  // namespace mfgsim
