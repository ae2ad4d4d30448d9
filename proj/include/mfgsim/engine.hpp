#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mfgsim/explore.hpp"
#include "mfgsim/knowledge.hpp"
#include "mfgsim/policy.hpp"
#include "mfgsim/scenario.hpp"
#include "mfgsim/world.hpp"

namespace mfgsim {

struct EventRecord {
    Tick tick = 0;
    std::string kind;
    std::string agent;
    std::string part;
    std::string detail;

    bool operator==(const EventRecord&) const = default;
};

struct ExploreEpisode {
    Disruption disruption;
    Tick repair_at = 0;
    bool success = false;
    AgentId exploration_agent;
    int rounds = 0;
    std::string failure;
};

struct RunMetrics {
    std::string scenario_name;
    Tick horizon = 0;
    int released_parts = 0;
    int completed_parts = 0;
    int failed_parts = 0;
    std::map<PartId, Tick> completion_ticks;
    std::vector<int> throughput_series;  // cumulative completions, one per tick
    std::map<AgentId, std::vector<double>> utilization_series;
    std::vector<EventRecord> event_log;
    std::vector<MergeRecord> merges;
    std::vector<ExploreEpisode> explorations;
};

enum class PartPhase { idle, committed, done, failed };

/// Runtime state of one part agent driven by the engine.
struct PartAgent {
    PartId id;
    ProcessPlan plan;
    ProductHistory history;
    StateId current_state;
    PartPhase phase = PartPhase::idle;
    int failed_attempts = 0;
    std::optional<AgentId> assigned;
    std::optional<StateId> target;  // navigation goal for committed routing
    Tick released_at = 0;
};

struct SummaryTables {
    Tick stride = 1;
    std::vector<Tick> ticks;
    std::vector<int> completed;
    std::map<AgentId, std::vector<double>> utilization;
};

/// Cumulative-completion and windowed-utilization series sampled at the
/// given stride, ready for CSV emission or plotting.
SummaryTables summarize(const RunMetrics& metrics, Tick stride);

/// Deterministic tick loop: disruption injection and repair, controller
/// sampling, the three-stage exploration workflow, resource execution and
/// part bidding, in a fixed within-tick order.
class Engine {
public:
    Engine(Scenario scenario, std::unique_ptr<Policy> policy);

    /// Policy built from the scenario's policy section (optionally
    /// overridden to builtin/service by the caller).
    static std::unique_ptr<Policy> make_policy(const Scenario& scenario);

    RunMetrics run();

    /// Status changes due at `now`: breakdowns start, repairs restore the
    /// pristine model and revoke any merge granted for the repaired agent.
    std::vector<AgentId> inject(Tick now);

    /// Parts whose release tick is `now`, instantiated on the plan.
    std::vector<PartId> release_parts(Tick now);

    const World& world() const { return world_; }
    const Scenario& scenario() const { return scenario_; }

    /// Full controller snapshot (capability models included).
    KnowledgeSnapshot snapshot(Tick now, bool with_models) const;

    void set_snapshot_dump_dir(std::string dir) { dump_dir_ = std::move(dir); }

private:
    void sample_and_detect(Tick now, std::vector<Disruption>& out);
    void run_exploration(Tick now, const std::vector<Disruption>& disruptions);
    void process_completions(Tick now);
    void run_bidding(Tick now);
    void start_work(Tick now);
    void finish_tick(Tick now);

    void fail_part(PartAgent& part, Tick now, const std::string& reason);
    void release_assignments(const AgentId& agent);
    void bid_attempt_failed(PartAgent& part, Tick now, const std::string& reason);
    int buffer_occupancy(const StateId& state) const;
    std::optional<AgentId> state_owner(const PartAgent& part) const;
    void log(Tick now, std::string kind, std::string agent, std::string part,
             std::string detail);
    void rebuild_prop_cache();

    Scenario scenario_;
    World world_;
    std::unique_ptr<Policy> policy_;
    ScoringConfig scoring_;
    std::map<PartId, PartAgent> parts_;
    std::vector<MergeRecord> active_merges_;
    KnowledgeSnapshot previous_snapshot_;
    RunMetrics metrics_;
    std::map<StateId, PropSet> prop_cache_;
    std::map<AgentId, int> completions_now_;
    std::mt19937_64 rng_;  // reserved for scenario-declared stochastic options
    std::string dump_dir_;
};

}  // namespace mfgsim
