#include "mfgsim/world.hpp"

#include <deque>

namespace mfgsim {

std::set<AgentId> World::agents_serving(const StateId& state) const {
    std::set<AgentId> serving;
    for (const auto& [id, agent] : agents) {
        if (agent.model.states.contains(state)) serving.insert(id);
    }
    return serving;
}

int World::proximity_hops(const AgentId& from, const AgentId& to) const {
    if (from == to) return 0;

    // Agent adjacency through shared states, rebuilt on demand; exploration
    // happens a handful of times per run.
    std::map<StateId, std::set<AgentId>> by_state;
    for (const auto& [id, agent] : agents) {
        for (const auto& [state, _] : agent.model.states) by_state[state].insert(id);
    }
    std::map<AgentId, std::set<AgentId>> adjacency;
    for (const auto& [state, ids] : by_state) {
        for (const AgentId& a : ids) {
            for (const AgentId& b : ids) {
                if (a != b) adjacency[a].insert(b);
            }
        }
    }

    std::map<AgentId, int> dist{{from, 0}};
    std::deque<AgentId> frontier{from};
    while (!frontier.empty()) {
        AgentId cur = frontier.front();
        frontier.pop_front();
        for (const AgentId& next : adjacency[cur]) {
            if (dist.contains(next)) continue;
            dist[next] = dist[cur] + 1;
            if (next == to) return dist[next];
            frontier.push_back(next);
        }
    }
    return -1;
}

std::vector<GrantedEvent> World::takeover_grant(const AgentId& disrupted) const {
    auto it = grants.find(disrupted);
    if (it != grants.end()) return it->second;

    std::vector<GrantedEvent> grant;
    auto agent = agents.find(disrupted);
    if (agent == agents.end()) return grant;
    const CapabilityModel& pristine = agent->second.pristine_model;
    for (const auto& [key, to] : pristine.transitions) {
        const auto& [from, event_id] = key;
        auto event = pristine.events.find(event_id);
        if (event == pristine.events.end()) continue;
        grant.push_back({event->second, from, to});
    }
    return grant;
}

}  // namespace mfgsim
