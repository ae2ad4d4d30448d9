#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfgsim/knowledge.hpp"
#include "mfgsim/model.hpp"
#include "mfgsim/scoring.hpp"
#include "mfgsim/world.hpp"

namespace mfgsim {

class Policy;

struct ExplorationParams {
    std::map<AgentId, ConstraintSet> constraints;
    int max_iterations = 3;
};

/// Decision output: which agent takes over and with which capabilities.
struct ExplorationOutput {
    AgentId exploration_agent;
    std::vector<ProcessEvent> explored_capabilities;
    std::string rationale;

    bool operator==(const ExplorationOutput&) const = default;
};

/// The three structured inputs handed to a decision policy.
struct PolicyInput {
    std::string instructions;
    std::string data_json;
    std::string template_text;
};

struct CandidateInfo {
    AgentId id;
    AgentKind kind = AgentKind::robot;
    PerformanceVector performance;
    int proximity = 0;
    std::vector<GrantedEvent> proposed_capabilities;
    ConstraintSet constraints;
};

struct ExplorationContext {
    Disruption disruption;
    KnowledgeSnapshot snapshot;
    std::vector<CandidateInfo> candidates;
    ExplorationParams params;
    ScoringConfig scoring;
};

/// Candidate list for a disruption: operational agents other than the
/// disrupted one, optionally restricted to the same kind, with performance,
/// proximity and the capabilities a takeover would grant them.
ExplorationContext build_exploration_context(const World& world,
                                             const Disruption& disruption,
                                             const KnowledgeSnapshot& snapshot,
                                             const ScoringConfig& scoring,
                                             int max_iterations,
                                             bool same_kind_only);

PolicyInput build_policy_input(const ExplorationContext& ctx);

/// Parse a policy response against the output template. Throws parse_error
/// with position/reason on malformed documents. Agent ids are not checked
/// here; that is the validation loop's job.
ExplorationOutput parse_output(const std::string& text);

/// Canonical serialized form of an output document.
std::string serialize_output(const ExplorationOutput& output);

struct ValidateResult {
    bool valid = false;
    std::optional<std::string> feedback;
    std::optional<ExplorationOutput> accepted;
    std::vector<GrantedEvent> resolved;    // accepted capabilities with transitions
    std::set<StateId> takeover_marked;     // handoff states the merge must reach
    int rounds = 0;                        // proposals consumed
};

/// The validation loop: up to n rounds of propose -> parse -> checks, where
/// each failed round feeds one of "Syntax error" / "Invalid agent" /
/// "Constraints not met" back into the next proposal. `first_response`
/// short-circuits round one when the caller already holds a proposal.
ValidateResult validate(Policy& policy, const PolicyInput& input,
                        const ExplorationContext& ctx,
                        const std::optional<std::string>& first_response = std::nullopt);

struct ExploreResult {
    std::optional<ExplorationOutput> output;  // empty on exploration failure
    std::vector<GrantedEvent> resolved;
    std::set<StateId> takeover_marked;
    int rounds = 0;
    std::string failure;
};

/// Full decision step for one disruption. A returned output is validated
/// and guaranteed to re-establish a transition chain into the takeover
/// marked states for every granted capability.
ExploreResult explore(const ExplorationContext& ctx, Policy& policy);

/// Undo information captured by merge_capabilities.
struct MergeRecord {
    AgentId disrupted_agent;
    AgentId exploration_agent;
    std::vector<GrantedEvent> capabilities;
    std::set<StateId> marked;                       // takeover goal states
    CapabilityModel merged_model;                   // exploration agent, post-merge
    std::map<AgentId, CapabilityModel> pre_models;  // both touched agents
    std::map<AgentId, NeighborTable> pre_tables;    // every agent
    EnvironmentModel pre_env;
    Tick merged_at = 0;
};

/// Deactivate the disrupted agent's events, extend the exploration agent's
/// model with the granted capabilities, and update shared states, neighbor
/// tables and the environment model.
MergeRecord merge_capabilities(World& world, const AgentId& exploration_agent,
                               const Disruption& disruption,
                               const std::vector<GrantedEvent>& capabilities,
                               const std::set<StateId>& marked, Tick now);

/// Restore models, neighbor tables and the environment to their pre-merge
/// snapshots. Completed work is untouched.
void revoke_capabilities(World& world, const MergeRecord& record);

/// Goal states a takeover must keep reachable: granted destinations served
/// by some operational third agent, falling back to all destinations.
std::set<StateId> takeover_marked_states(const std::vector<GrantedEvent>& capabilities,
                                         const KnowledgeSnapshot& snapshot,
                                         const AgentId& exploration_agent,
                                         const AgentId& disrupted_agent);

}  // namespace mfgsim
