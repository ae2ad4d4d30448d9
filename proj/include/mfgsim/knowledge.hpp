#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfgsim/model.hpp"
#include "mfgsim/resource.hpp"

namespace mfgsim {

/// Per-resource metric sample at one tick, over a trailing window.
struct PerformanceVector {
    AgentId agent_id;
    Tick tick = 0;
    int throughput = 0;        // events completed in the window
    double utilization = 0.0;  // busy ticks / window ticks
    bool breakdown = false;
    int availability = 1;      // 1 - breakdown

    bool operator==(const PerformanceVector&) const = default;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
    bool operator==(const Interval&) const = default;
};

/// Per-resource parameter limits: operational boundaries say what the
/// resource can do, safety limits what it may do. Both are checked
/// independently.
struct ConstraintSet {
    std::map<std::string, Interval> operation_bounds;
    std::map<std::string, Interval> safety_limits;

    bool operator==(const ConstraintSet&) const = default;
};

struct Disruption {
    AgentId disrupted_agent;
    std::set<StateId> affected_states;
    std::set<EventId> affected_events;
    Tick detected_at = 0;
};

struct AgentSnapshot {
    CapabilityModel model;
    AgentKind kind = AgentKind::robot;
    ResourceStatus status;
    std::optional<TaskExecution> current_task;
    PerformanceVector performance;
};

struct PartSnapshot {
    ProcessPlan plan;
    ProductHistory history;
    StateId current_state;
};

/// Immutable copy of the controller's view at one tick.
struct KnowledgeSnapshot {
    Tick tick = 0;
    std::map<AgentId, AgentSnapshot> agents;
    std::map<PartId, PartSnapshot> parts;
};

/// Trailing-window metrics over the agent's recorded activity. For
/// now < window the window truncates to [0, now); at tick 0 utilization is 0.
PerformanceVector sample_performance(const ResourceAgent& agent, Tick now, Tick window);

/// One disruption per agent that flipped operational -> broken between the
/// two snapshots. Affected states/events are the agent's whole model.
std::vector<Disruption> detect_disruptions(const KnowledgeSnapshot& current,
                                           const KnowledgeSnapshot& previous);

enum class ConstraintClass { operational, safety };

struct ConstraintViolation {
    std::string param;
    ConstraintClass which = ConstraintClass::operational;
    double value = 0.0;
    Interval bound;

    bool operator==(const ConstraintViolation&) const = default;
};

/// Every parameter of `capability` outside its declared operational or
/// safety interval. Parameters without declared bounds pass.
std::vector<ConstraintViolation> check_constraints(const ConstraintSet& constraints,
                                                   const ProcessEvent& capability);

}  // namespace mfgsim
