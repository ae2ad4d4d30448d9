#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mfgsim/knowledge.hpp"
#include "mfgsim/model.hpp"
#include "mfgsim/world.hpp"

namespace mfgsim {

struct ScenarioOptions {
    Tick horizon = 6000;
    bool exploration = true;
    Tick transport_duration = 10;
    int retry_limit = 3;
    Tick window = 200;
    Tick stride = 10;
    int max_iterations = 3;
    bool same_kind_candidates = true;
    bool utilization_complement = false;
    std::uint64_t seed = 0;

    bool operator==(const ScenarioOptions&) const = default;
};

struct PolicyConfig {
    std::string type = "builtin";  // builtin | service
    std::map<std::string, double> weights;  // optional factor-weight overrides
    std::string service_url;
    int timeout_seconds = 30;

    bool operator==(const PolicyConfig&) const = default;
};

struct StateDef {
    StateId id;
    std::string description;
    PropSet props;
    AgentId owner;

    bool operator==(const StateDef&) const = default;
};

struct EventDef {
    EventId id;
    EventKind kind = EventKind::transport;
    Tick duration = 0;    // 0 = resolve from process time / transport default
    std::string process;  // for process events
    StateId from;
    StateId to;
    std::map<std::string, double> params;

    bool operator==(const EventDef&) const = default;
};

struct AgentDef {
    AgentId id;
    AgentKind kind = AgentKind::robot;
    std::vector<StateId> states;
    std::vector<EventDef> events;

    bool operator==(const AgentDef&) const = default;
};

struct ReleaseEntry {
    int count = 1;
    Tick tick = 0;
    StateId state;
    std::string prefix = "P";

    bool operator==(const ReleaseEntry&) const = default;
};

struct DisruptionEntry {
    AgentId agent;
    Tick breakdown_tick = 0;
    Tick mttr = 1;

    bool operator==(const DisruptionEntry&) const = default;
};

struct DisruptionSchedule {
    std::vector<DisruptionEntry> entries;

    bool operator==(const DisruptionSchedule&) const = default;
};

/// A fully declared facility plus run configuration. Scenario files may be
/// written in this explicit form or with a "topology" section (cells,
/// stations, robots, buffers) that the loader expands into it.
struct Scenario {
    int schema_version = 1;
    std::string name;
    ScenarioOptions options;
    PolicyConfig policy;
    std::map<std::string, Tick> process_times;
    std::set<std::string> param_vocab;
    std::set<PropId> non_physical_props;
    std::vector<StateDef> states;
    std::vector<AgentDef> agents;
    std::map<AgentId, ConstraintSet> constraints;
    std::map<AgentId, std::vector<EventDef>> grants;
    std::map<StateId, int> buffer_capacity;  // absent = unbounded
    ProcessPlan plan;
    std::vector<ReleaseEntry> release;
    DisruptionSchedule schedule;

    bool operator==(const Scenario&) const = default;

    /// Effective duration of an event definition.
    Tick resolve_duration(const EventDef& event) const;
};

/// Parse and validate a scenario document. Throws parse_error on malformed
/// documents and validation_error (naming the offending entity) on
/// violated invariants.
Scenario load_scenario_text(const std::string& text, const std::string& fallback_name = "");

/// Load from a file path or a bundled scenario name.
Scenario load_scenario(const std::string& path_or_name);

/// Canonical JSON document for a scenario (explicit form, stable ordering).
std::string save_scenario(const Scenario& scenario);

/// All invariant violations, empty when the scenario is well-formed.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Instantiate the live world: resource agents with capability models and
/// pristine snapshots, seeded neighbor tables, and the merged environment.
World build_world(const Scenario& scenario);

/// Bundled scenario names.
std::vector<std::string> bundled_scenarios();
std::optional<std::string> bundled_scenario_text(const std::string& name);

}  // namespace mfgsim
