#include "mfgsim/product.hpp"

#include <algorithm>

#include "mfgsim/errors.hpp"

namespace mfgsim {

namespace {

bool step_satisfied(const PlanStep& step, const PropSet& achieved) {
    return std::includes(achieved.begin(), achieved.end(), step.props.begin(),
                         step.props.end());
}

}  // namespace

std::optional<NextRequirement> next_requirement(const ProcessPlan& plan,
                                                const ProductHistory& history) {
    PropSet achieved = history.achieved_union();
    std::optional<std::size_t> first_unsatisfied;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        if (!step_satisfied(plan.steps[i], achieved)) {
            if (!first_unsatisfied) first_unsatisfied = i;
        } else if (first_unsatisfied) {
            throw SimError(ErrorCode::inconsistent_history,
                           "plan step " + std::to_string(i + 1) +
                               " achieved before step " +
                               std::to_string(*first_unsatisfied + 1));
        }
    }
    if (!first_unsatisfied) return std::nullopt;
    return NextRequirement{*first_unsatisfied, plan.steps[*first_unsatisfied]};
}

std::vector<Bid> solicit_bids(const PartId& part, const EnvironmentModel& env,
                              const BidRequest& req, const NeighborTable& neighbors,
                              const std::optional<AgentId>& owner, const BidFn& evaluate) {
    (void)part;
    (void)env;
    std::set<AgentId> contacted = neighbor_lookup(neighbors, req.from_state);
    if (owner) contacted.insert(*owner);
    if (contacted.empty()) {
        throw SimError(ErrorCode::no_reachable_agents,
                       "no agent reachable from state " + req.from_state);
    }
    std::vector<Bid> bids;
    bids.reserve(contacted.size());
    for (const AgentId& agent : contacted) {
        bids.push_back(evaluate(agent, req));
    }
    return bids;
}

Bid select_bid(const std::vector<Bid>& bids) {
    const Bid* best = nullptr;
    for (const Bid& bid : bids) {
        if (!bid.valid) continue;
        if (!best || bid.completion_cost < best->completion_cost ||
            (bid.completion_cost == best->completion_cost && bid.bidder < best->bidder)) {
            best = &bid;
        }
    }
    if (!best) {
        throw SimError(ErrorCode::all_bids_invalid, "no valid bid");
    }
    return *best;
}

ProductHistory record_progress(ProductHistory history, const StateId& state,
                               const PropSet& props, const AgentId& reporter) {
    history.visited_states.push_back(state);
    auto& achieved = history.achieved_props[state];
    achieved.insert(props.begin(), props.end());
    history.reporting_agent[state] = reporter;
    return history;
}

}  // namespace mfgsim
