#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mfgsim {

using Tick = std::int64_t;
using AgentId = std::string;
using StateId = std::string;
using EventId = std::string;
using PartId = std::string;
using PropId = std::string;
using PropSet = std::set<PropId>;

/// A condition a physical part can be in (at a buffer, on a machine, in
/// transit between two locations).
struct PartState {
    StateId id;
    std::string description;

    bool operator==(const PartState&) const = default;
};

enum class EventKind { transport, process };

/// An operation a resource can start on a part. Parameters carry the
/// physical envelope of the operation (reach, spindle speed, ...) and are
/// what constraint checks inspect.
struct ProcessEvent {
    EventId id;
    EventKind kind = EventKind::transport;
    Tick duration = 1;
    std::map<std::string, double> params;

    bool operator==(const ProcessEvent&) const = default;
};

/// Finite-state capability model of one resource: which part states it can
/// produce, which events it can start, and how events move parts between
/// states. The transition table is a partial function; looking up an
/// undefined pair is an error, never a self-loop.
struct CapabilityModel {
    std::map<StateId, PartState> states;
    std::map<EventId, ProcessEvent> events;
    std::map<std::pair<StateId, EventId>, StateId> transitions;
    std::map<StateId, PropSet> physical_props;
    StateId initial_state;                // set per bid request
    std::set<StateId> marked_states;      // set per bid request
    std::set<StateId> shared_states;

    bool operator==(const CapabilityModel&) const = default;
};

/// Which resource agents serve each shared state; how task requests are
/// forwarded between neighbors.
struct NeighborTable {
    std::map<StateId, std::set<AgentId>> entries;

    bool operator==(const NeighborTable&) const = default;
};

struct PlanStep {
    PropSet props;          // all must be achieved to satisfy the step
    PropSet non_physical;   // subset of props tagged non-physical

    bool operator==(const PlanStep&) const = default;
};

/// Ordered property sets a part must achieve, strictly in sequence.
struct ProcessPlan {
    std::vector<PlanStep> steps;

    bool operator==(const ProcessPlan&) const = default;
};

/// Progress record of one part: visited states (append-only), the
/// properties achieved at each, and which agent reported each arrival.
struct ProductHistory {
    std::vector<StateId> visited_states;
    std::map<StateId, PropSet> achieved_props;
    std::map<StateId, AgentId> reporting_agent;

    bool operator==(const ProductHistory&) const = default;

    /// Union of all properties achieved so far.
    PropSet achieved_union() const;
};

/// The product agent's holistic view: every state/event in the facility
/// plus the agent responsible for each event.
struct EnvironmentModel {
    std::map<StateId, PartState> states;
    std::map<EventId, ProcessEvent> events;
    std::map<std::pair<StateId, EventId>, StateId> transitions;
    std::map<StateId, PropSet> physical_props;
    std::map<EventId, AgentId> event_owner;
    StateId current_state;

    bool operator==(const EnvironmentModel&) const = default;
};

/// Resulting state of applying `event` in `state`. Throws SimError
/// (unknown_state / unknown_event / undefined_transition) on undeclared ids
/// or pairs outside the transition table.
StateId apply_transition(const CapabilityModel& model, const StateId& state,
                         const EventId& event);

/// Shortest event sequence from `from` into the model's marked states
/// (BFS over the transition table, lexicographic event order on ties).
/// nullopt when no marked state is reachable.
std::optional<std::vector<EventId>> path_to_marked(const CapabilityModel& model,
                                                   const StateId& from);

/// Same search over an environment model with an explicit goal set and an
/// optional event filter (e.g. "owner is operational").
std::optional<std::vector<EventId>> find_path(
    const EnvironmentModel& env, const StateId& from,
    const std::set<StateId>& goals,
    const std::function<bool(const EventId&)>& usable);

std::set<AgentId> neighbor_lookup(const NeighborTable& table, const StateId& state);

struct ModelViolation {
    std::string subject;   // offending id
    std::string message;

    bool operator==(const ModelViolation&) const = default;
};

/// Every structural defect in the model: dangling transition endpoints,
/// initial state outside X, marked or shared states outside X.
std::vector<ModelViolation> validate_model(const CapabilityModel& model);

/// Properties a state satisfies for requirement matching: its declared
/// property set plus an implicit location property "loc:<state-id>".
PropSet state_props(const std::map<StateId, PropSet>& physical_props,
                    const StateId& state);

bool props_satisfy(const std::map<StateId, PropSet>& physical_props,
                   const StateId& state, const PropSet& required);

inline PropId loc_prop(const StateId& state) { return "loc:" + state; }

}  // namespace mfgsim
