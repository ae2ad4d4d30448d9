#pragma once

#include <map>
#include <set>
#include <vector>

#include "mfgsim/knowledge.hpp"
#include "mfgsim/model.hpp"
#include "mfgsim/resource.hpp"

namespace mfgsim {

/// A capability that can be handed to an exploration agent: the event
/// definition plus the state transition it realizes.
struct GrantedEvent {
    ProcessEvent event;
    StateId from;
    StateId to;

    bool operator==(const GrantedEvent&) const = default;
};

/// The live facility: every resource agent, the merged environment model,
/// and the static lookup structures built from the scenario.
struct World {
    std::map<AgentId, ResourceAgent> agents;
    EnvironmentModel env;
    std::map<StateId, AgentId> declared_owner;
    std::map<AgentId, ConstraintSet> constraints;
    // takeover capabilities per disruptable agent; when absent, the agent's
    // own events are granted verbatim
    std::map<AgentId, std::vector<GrantedEvent>> grants;
    std::set<PropId> non_physical_props;

    std::set<AgentId> agents_serving(const StateId& state) const;

    /// Hop distance between agents in the facility graph (agents are
    /// adjacent when their models share a state). -1 when disconnected.
    int proximity_hops(const AgentId& from, const AgentId& to) const;

    /// Capabilities granted when `disrupted` fails: the scenario's declared
    /// grant if present, otherwise the agent's own events verbatim.
    std::vector<GrantedEvent> takeover_grant(const AgentId& disrupted) const;
};

}  // namespace mfgsim
