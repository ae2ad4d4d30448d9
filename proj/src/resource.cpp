#include "mfgsim/resource.hpp"

#include <numeric>

#include "mfgsim/errors.hpp"

namespace mfgsim {

Tick ResourceAgent::backlog(Tick now) const {
    Tick total = 0;
    if (exec) total += exec->finishes_at - now;
    for (const QueuedTask& task : queue) {
        auto it = model.events.find(task.event);
        if (it != model.events.end()) total += it->second.duration;
    }
    return total;
}

Bid evaluate_bid(ResourceAgent& agent, const BidRequest& req, Tick now) {
    Bid bid;
    bid.bidder = agent.id;
    if (!agent.operational()) {
        bid.reason = "AgentBroken";
        return bid;
    }
    if (!agent.model.states.contains(req.from_state)) {
        bid.reason = "origin not served";
        return bid;
    }

    agent.model.initial_state = req.from_state;
    agent.model.marked_states.clear();
    for (const auto& [state, _] : agent.model.states) {
        if (props_satisfy(agent.model.physical_props, state, req.required_props)) {
            agent.model.marked_states.insert(state);
        }
    }
    if (agent.model.marked_states.empty()) {
        bid.reason = "no satisfying state";
        return bid;
    }

    auto path = path_to_marked(agent.model, req.from_state);
    if (!path) {
        bid.reason = "not reachable";
        return bid;
    }
    if (path->empty()) {
        bid.reason = "already satisfied";
        return bid;
    }

    Tick cost = agent.backlog(now);
    for (const EventId& event : *path) {
        cost += agent.model.events.at(event).duration;
    }
    bid.promised_path = std::move(*path);
    bid.completion_cost = cost;
    bid.valid = true;
    return bid;
}

TaskExecution start_event(ResourceAgent& agent, const PartId& part,
                          const EventId& event, const StateId& from_state, Tick now) {
    if (!agent.operational()) {
        throw SimError(ErrorCode::agent_broken, agent.id + " is broken");
    }
    auto it = agent.model.events.find(event);
    if (it == agent.model.events.end()) {
        throw SimError(ErrorCode::unknown_event,
                       agent.id + " has no event " + event);
    }
    if (agent.exec) {
        throw SimError(ErrorCode::agent_broken, agent.id + " is busy");
    }
    TaskExecution exec;
    exec.part_id = part;
    exec.event = event;
    exec.started_at = now;
    exec.finishes_at = now + it->second.duration;
    exec.from_state = from_state;
    exec.to_state = apply_transition(agent.model, from_state, event);
    exec.to_props = state_props(agent.model.physical_props, exec.to_state);
    agent.exec = exec;
    return exec;
}

std::vector<Completion> tick_complete(ResourceAgent& agent, Tick now) {
    std::vector<Completion> done;
    if (agent.exec && agent.exec->finishes_at == now) {
        done.push_back({agent.exec->part_id, agent.exec->to_state, agent.exec->to_props});
        agent.exec.reset();
    }
    return done;
}

std::vector<PartId> apply_status(ResourceAgent& agent, const ResourceStatus& status) {
    if (status.mode == agent.status.mode) {
        return {};
    }
    std::vector<PartId> failed;
    if (status.mode == ResourceMode::broken) {
        if (agent.exec) {
            failed.push_back(agent.exec->part_id);
            agent.exec.reset();
        }
        agent.status = status;
    } else {
        agent.status = status;
        agent.model = agent.pristine_model;
    }
    return failed;
}

}  // namespace mfgsim
