#pragma once

// Test-side oracles, independent of the library's search and validation
// paths: plain frontier BFS over explicit adjacency, direct interval
// membership, and an event-calendar replay.

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mfgsim/model.hpp"

namespace oracle {

using mfgsim::CapabilityModel;
using mfgsim::EventId;
using mfgsim::StateId;

// Hop distances from `from` over the model's transition table.
inline std::map<StateId, int> bfs_distances(const CapabilityModel& model,
                                            const StateId& from) {
    std::map<StateId, std::set<StateId>> next;
    for (const auto& [key, to] : model.transitions) next[key.first].insert(to);

    std::map<StateId, int> dist{{from, 0}};
    std::deque<StateId> frontier{from};
    while (!frontier.empty()) {
        StateId cur = frontier.front();
        frontier.pop_front();
        for (const StateId& to : next[cur]) {
            if (dist.contains(to)) continue;
            dist[to] = dist[cur] + 1;
            frontier.push_back(to);
        }
    }
    return dist;
}

inline std::optional<int> distance_to_marked(const CapabilityModel& model,
                                             const StateId& from) {
    std::map<StateId, int> dist = bfs_distances(model, from);
    std::optional<int> best;
    for (const StateId& goal : model.marked_states) {
        auto it = dist.find(goal);
        if (it == dist.end()) continue;
        if (!best || it->second < *best) best = it->second;
    }
    return best;
}

inline bool reaches_any(const CapabilityModel& model, const StateId& from,
                        const std::set<StateId>& goals) {
    if (goals.contains(from)) return true;
    std::map<StateId, int> dist = bfs_distances(model, from);
    for (const StateId& goal : goals) {
        if (dist.contains(goal)) return true;
    }
    return false;
}

// Random layered model: states s0..s(n-1), every transition goes strictly
// forward, which guarantees (acyclic) reachability structure.
inline CapabilityModel random_dag_model(std::mt19937& rng, int states, int events) {
    CapabilityModel model;
    for (int i = 0; i < states; ++i) {
        StateId id = "s" + std::to_string(i);
        model.states[id] = {id, ""};
    }
    std::uniform_int_distribution<int> pick(0, states - 1);
    for (int e = 0; e < events; ++e) {
        int a = pick(rng), b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        EventId id = "e" + std::to_string(e);
        model.events[id] = {id, mfgsim::EventKind::transport, 1, {}};
        model.transitions[{"s" + std::to_string(a), id}] = "s" + std::to_string(b);
    }
    model.initial_state = "s0";
    model.marked_states = {"s" + std::to_string(states - 1)};
    return model;
}

}  // namespace oracle
