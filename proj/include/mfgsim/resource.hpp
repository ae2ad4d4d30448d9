#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "mfgsim/model.hpp"
#include "mfgsim/product.hpp"

namespace mfgsim {

enum class AgentKind { robot, machine };

enum class ResourceMode { operational, broken };

struct ResourceStatus {
    ResourceMode mode = ResourceMode::operational;
    std::optional<Tick> broken_since;
    std::optional<Tick> repair_at;

    bool operator==(const ResourceStatus&) const = default;
};

/// One scheduled unit of work. Source and target states are resolved when
/// the event starts so the completion stays well-defined even if the
/// capability model is reverted mid-flight.
struct TaskExecution {
    PartId part_id;
    EventId event;
    Tick started_at = 0;
    Tick finishes_at = 0;
    StateId from_state;
    StateId to_state;
    PropSet to_props;
};

struct QueuedTask {
    PartId part_id;
    EventId event;
};

struct Completion {
    PartId part_id;
    StateId new_state;
    PropSet achieved_props;
};

/// One machine, robot, or buffer-serving robot: a capability model, a
/// pristine snapshot of it, the execution queue, and per-tick activity
/// history used by the performance monitor.
struct ResourceAgent {
    AgentId id;
    AgentKind kind = AgentKind::robot;
    CapabilityModel model;
    CapabilityModel pristine_model;   // as loaded; restored on repair
    NeighborTable table;
    NeighborTable pristine_table;
    ResourceStatus status;
    std::optional<TaskExecution> exec;
    std::deque<QueuedTask> queue;

    // tick-indexed activity history, appended once per tick by the engine
    std::vector<std::uint8_t> busy;
    std::vector<std::uint16_t> completions;

    bool operational() const { return status.mode == ResourceMode::operational; }

    /// Ticks of committed work: remainder of the running execution plus
    /// every queued event's duration.
    Tick backlog(Tick now) const;
};

/// Evaluate a bid request against this agent's own capability model. Sets
/// the model's initial state to the request origin and its marked states to
/// everything satisfying the requested properties, then bids the shortest
/// path. Broken agents and unreachable requests yield invalid bids with the
/// reason recorded.
Bid evaluate_bid(ResourceAgent& agent, const BidRequest& req, Tick now);

/// Schedule `event` for `part` starting now, resolving the target state and
/// properties from the current model. Throws agent_broken / unknown_event;
/// the agent must be idle.
TaskExecution start_event(ResourceAgent& agent, const PartId& part,
                          const EventId& event, const StateId& from_state, Tick now);

/// Completions due exactly at `now`; finished work leaves the agent.
std::vector<Completion> tick_complete(ResourceAgent& agent, Tick now);

/// Apply a status transition. Going broken aborts the in-flight execution
/// and returns the affected part ids; going operational restores the
/// pristine capability model. Re-applying the current mode is a no-op.
std::vector<PartId> apply_status(ResourceAgent& agent, const ResourceStatus& status);

}  // namespace mfgsim
