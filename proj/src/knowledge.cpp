#include "mfgsim/knowledge.hpp"

#include <algorithm>

namespace mfgsim {

PerformanceVector sample_performance(const ResourceAgent& agent, Tick now, Tick window) {
    PerformanceVector pm;
    pm.agent_id = agent.id;
    pm.tick = now;
    pm.breakdown = !agent.operational();
    pm.availability = pm.breakdown ? 0 : 1;

    Tick recorded = static_cast<Tick>(agent.busy.size());
    Tick end = std::min(now, recorded);
    Tick span = std::min(window, end);
    if (span <= 0) return pm;

    Tick busy_ticks = 0;
    int completed = 0;
    for (Tick t = end - span; t < end; ++t) {
        busy_ticks += agent.busy[static_cast<std::size_t>(t)];
        if (t < static_cast<Tick>(agent.completions.size())) {
            completed += agent.completions[static_cast<std::size_t>(t)];
        }
    }
    pm.utilization = static_cast<double>(busy_ticks) / static_cast<double>(span);
    pm.throughput = completed;
    return pm;
}

std::vector<Disruption> detect_disruptions(const KnowledgeSnapshot& current,
                                           const KnowledgeSnapshot& previous) {
    std::vector<Disruption> found;
    for (const auto& [id, snap] : current.agents) {
        if (snap.status.mode != ResourceMode::broken) continue;
        auto prev = previous.agents.find(id);
        bool was_broken = prev != previous.agents.end() &&
                          prev->second.status.mode == ResourceMode::broken;
        if (was_broken) continue;

        Disruption d;
        d.disrupted_agent = id;
        d.detected_at = current.tick;
        // The whole model is rendered unexecutable; partial disruptions are
        // not modeled. A breakdown leaves the model itself untouched, so the
        // current snapshot still carries the pre-disruption states/events.
        for (const auto& [state, _] : snap.model.states) d.affected_states.insert(state);
        for (const auto& [event, _] : snap.model.events) d.affected_events.insert(event);
        found.push_back(std::move(d));
    }
    return found;
}

std::vector<ConstraintViolation> check_constraints(const ConstraintSet& constraints,
                                                   const ProcessEvent& capability) {
    std::vector<ConstraintViolation> violations;
    for (const auto& [param, value] : capability.params) {
        auto op = constraints.operation_bounds.find(param);
        if (op != constraints.operation_bounds.end() && !op->second.contains(value)) {
            violations.push_back({param, ConstraintClass::operational, value, op->second});
        }
        auto safe = constraints.safety_limits.find(param);
        if (safe != constraints.safety_limits.end() && !safe->second.contains(value)) {
            violations.push_back({param, ConstraintClass::safety, value, safe->second});
        }
    }
    return violations;
}

}  // namespace mfgsim
