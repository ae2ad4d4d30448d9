#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfgsim/model.hpp"

namespace mfgsim {

/// Request sent to candidate resource agents: take the part at `from_state`
/// to any state satisfying `required_props`.
struct BidRequest {
    PartId part_id;
    PropSet required_props;
    StateId from_state;
    std::optional<Tick> deadline_hint;
};

struct Bid {
    AgentId bidder;
    std::vector<EventId> promised_path;
    Tick completion_cost = 0;
    bool valid = false;
    std::string reason;  // set when invalid

    bool operator==(const Bid&) const = default;
};

struct NextRequirement {
    std::size_t step_index = 0;
    PlanStep step;
};

/// First plan step whose properties are not all achieved yet; nullopt once
/// every step is satisfied. Throws inconsistent_history when a later step is
/// satisfied while an earlier one is not.
std::optional<NextRequirement> next_requirement(const ProcessPlan& plan,
                                                const ProductHistory& history);

using BidFn = std::function<Bid(const AgentId&, const BidRequest&)>;

/// One bid per contacted agent: the neighbor-table entry for the request's
/// origin state plus the agent currently owning that state. Throws
/// no_reachable_agents when nobody can be contacted.
std::vector<Bid> solicit_bids(const PartId& part, const EnvironmentModel& env,
                              const BidRequest& req, const NeighborTable& neighbors,
                              const std::optional<AgentId>& owner, const BidFn& evaluate);

/// Valid bid with minimal completion cost, ties broken by bidder id.
/// Throws all_bids_invalid when no valid bid exists.
Bid select_bid(const std::vector<Bid>& bids);

/// History extended by one visited state. Earlier entries are untouched.
ProductHistory record_progress(ProductHistory history, const StateId& state,
                               const PropSet& props, const AgentId& reporter);

}  // namespace mfgsim
