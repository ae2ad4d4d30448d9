#include "mfgsim/engine.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>

#include "mfgsim/errors.hpp"
#include "mfgsim/product.hpp"

namespace mfgsim {

namespace {

std::string join_props(const PropSet& props) {
    std::string out;
    for (const PropId& p : props) {
        if (!out.empty()) out += '+';
        out += p;
    }
    return out;
}

std::string join_events(const std::vector<GrantedEvent>& caps) {
    std::string out;
    for (const GrantedEvent& cap : caps) {
        if (!out.empty()) out += ',';
        out += cap.event.id;
    }
    return out;
}

}  // namespace

SummaryTables summarize(const RunMetrics& metrics, Tick stride) {
    SummaryTables tables;
    tables.stride = std::max<Tick>(1, stride);
    Tick ticks = static_cast<Tick>(metrics.throughput_series.size());
    for (Tick t = 0; t < ticks; t += tables.stride) {
        tables.ticks.push_back(t);
        tables.completed.push_back(metrics.throughput_series[static_cast<std::size_t>(t)]);
    }
    for (const auto& [agent, series] : metrics.utilization_series) {
        std::vector<double>& sampled = tables.utilization[agent];
        for (Tick t = 0; t < ticks; t += tables.stride) {
            sampled.push_back(t < static_cast<Tick>(series.size())
                                  ? series[static_cast<std::size_t>(t)]
                                  : 0.0);
        }
    }
    return tables;
}

Engine::Engine(Scenario scenario, std::unique_ptr<Policy> policy)
    : scenario_(std::move(scenario)),
      world_(build_world(scenario_)),
      policy_(std::move(policy)),
      rng_(scenario_.options.seed) {
    scoring_ = ScoringConfig::standard(scenario_.options.utilization_complement);
    for (const auto& [factor, weight] : scenario_.policy.weights) {
        auto it = scoring_.factors.find(factor);
        if (it != scoring_.factors.end()) it->second.weight = weight;
    }
    rebuild_prop_cache();
}

std::unique_ptr<Policy> Engine::make_policy(const Scenario& scenario) {
    if (scenario.policy.type == "service") {
        ServiceConfig config;
        config.url = scenario.policy.service_url;
        config.timeout_seconds = scenario.policy.timeout_seconds;
        return std::make_unique<ServicePolicy>(config);
    }
    ScoringConfig scoring =
        ScoringConfig::standard(scenario.options.utilization_complement);
    for (const auto& [factor, weight] : scenario.policy.weights) {
        auto it = scoring.factors.find(factor);
        if (it != scoring.factors.end()) it->second.weight = weight;
    }
    return std::make_unique<BuiltinPolicy>(scoring);
}

void Engine::rebuild_prop_cache() {
    prop_cache_.clear();
    for (const auto& [state, _] : world_.env.states) {
        prop_cache_[state] = state_props(world_.env.physical_props, state);
    }
}

void Engine::log(Tick now, std::string kind, std::string agent, std::string part,
                 std::string detail) {
    metrics_.event_log.push_back(
        {now, std::move(kind), std::move(agent), std::move(part), std::move(detail)});
}

KnowledgeSnapshot Engine::snapshot(Tick now, bool with_models) const {
    KnowledgeSnapshot snap;
    snap.tick = now;
    for (const auto& [id, agent] : world_.agents) {
        AgentSnapshot as;
        // Light snapshots skip model copies except for broken agents, whose
        // models disruption detection needs.
        if (with_models || !agent.operational()) as.model = agent.model;
        as.kind = agent.kind;
        as.status = agent.status;
        as.current_task = agent.exec;
        as.performance = sample_performance(agent, now, scenario_.options.window);
        snap.agents.emplace(id, std::move(as));
    }
    if (with_models) {
        for (const auto& [id, part] : parts_) {
            if (part.phase == PartPhase::done || part.phase == PartPhase::failed) continue;
            snap.parts.emplace(id, PartSnapshot{part.plan, part.history, part.current_state});
        }
    }
    return snap;
}

std::optional<AgentId> Engine::state_owner(const PartAgent& part) const {
    const StateId& state = part.current_state;
    auto serves = [&](const AgentId& id) {
        auto it = world_.agents.find(id);
        return it != world_.agents.end() && it->second.model.states.contains(state);
    };
    auto reporter = part.history.reporting_agent.find(state);
    if (reporter != part.history.reporting_agent.end() && serves(reporter->second)) {
        return reporter->second;
    }
    auto declared = world_.declared_owner.find(state);
    if (declared != world_.declared_owner.end() && serves(declared->second)) {
        return declared->second;
    }
    std::set<AgentId> serving = world_.agents_serving(state);
    if (!serving.empty()) return *serving.begin();
    return std::nullopt;
}

void Engine::fail_part(PartAgent& part, Tick now, const std::string& reason) {
    if (part.phase == PartPhase::failed) return;
    if (part.assigned) {
        auto it = world_.agents.find(*part.assigned);
        if (it != world_.agents.end()) {
            std::erase_if(it->second.queue,
                          [&](const QueuedTask& t) { return t.part_id == part.id; });
        }
    }
    part.phase = PartPhase::failed;
    part.assigned.reset();
    part.target.reset();
    metrics_.failed_parts += 1;
    log(now, "part-failed", "", part.id, reason);
}

void Engine::release_assignments(const AgentId& agent_id) {
    ResourceAgent& agent = world_.agents.at(agent_id);
    std::set<PartId> affected;
    for (const QueuedTask& task : agent.queue) affected.insert(task.part_id);
    agent.queue.clear();
    for (const PartId& pid : affected) {
        auto it = parts_.find(pid);
        if (it == parts_.end()) continue;
        PartAgent& part = it->second;
        if (part.phase != PartPhase::committed) continue;
        part.phase = PartPhase::idle;
        part.assigned.reset();
        part.failed_attempts = 0;
    }
}

std::vector<AgentId> Engine::inject(Tick now) {
    std::vector<AgentId> changed;

    for (const DisruptionEntry& entry : scenario_.schedule.entries) {
        if (entry.breakdown_tick != now) continue;
        ResourceAgent& agent = world_.agents.at(entry.agent);
        ResourceStatus status;
        status.mode = ResourceMode::broken;
        status.broken_since = now;
        status.repair_at = now + entry.mttr;
        std::vector<PartId> stuck = apply_status(agent, status);
        log(now, "breakdown", entry.agent, "",
            "mttr=" + std::to_string(entry.mttr) +
                " repair_at=" + std::to_string(now + entry.mttr));
        for (const PartId& pid : stuck) {
            auto it = parts_.find(pid);
            if (it != parts_.end()) fail_part(it->second, now, "stuck on " + entry.agent);
        }
        release_assignments(entry.agent);
        changed.push_back(entry.agent);
    }

    for (auto& [id, agent] : world_.agents) {
        if (agent.status.mode != ResourceMode::broken) continue;
        if (!agent.status.repair_at || *agent.status.repair_at != now) continue;

        // Undo takeover merges granted for this agent, newest first.
        for (auto it = active_merges_.rbegin(); it != active_merges_.rend();) {
            if (it->disrupted_agent != id) {
                ++it;
                continue;
            }
            MergeRecord record = *it;
            revoke_capabilities(world_, record);
            log(now, "revoke", record.exploration_agent, "",
                "returned " + std::to_string(record.capabilities.size()) +
                    " capabilities of " + id);
            ResourceAgent& explorer = world_.agents.at(record.exploration_agent);
            std::set<PartId> dropped;
            for (const QueuedTask& task : explorer.queue) {
                if (!explorer.model.events.contains(task.event)) {
                    dropped.insert(task.part_id);
                }
            }
            if (!dropped.empty()) {
                std::erase_if(explorer.queue, [&](const QueuedTask& task) {
                    return dropped.contains(task.part_id);
                });
                for (const PartId& pid : dropped) {
                    auto part = parts_.find(pid);
                    if (part == parts_.end()) continue;
                    if (part->second.phase != PartPhase::committed) continue;
                    part->second.phase = PartPhase::idle;
                    part->second.assigned.reset();
                    part->second.failed_attempts = 0;
                }
            }
            it = decltype(it)(active_merges_.erase(std::next(it).base()));
            rebuild_prop_cache();
        }

        ResourceStatus status;
        status.mode = ResourceMode::operational;
        apply_status(agent, status);
        log(now, "repair", id, "", "");
        changed.push_back(id);
    }
    return changed;
}

void Engine::sample_and_detect(Tick now, std::vector<Disruption>& out) {
    KnowledgeSnapshot current = snapshot(now, false);
    for (const auto& [id, as] : current.agents) {
        metrics_.utilization_series[id].push_back(as.performance.utilization);
    }
    out = detect_disruptions(current, previous_snapshot_);
    previous_snapshot_ = std::move(current);
}

void Engine::run_exploration(Tick now, const std::vector<Disruption>& disruptions) {
    if (!scenario_.options.exploration) return;
    for (const Disruption& d : disruptions) {
        KnowledgeSnapshot snap = snapshot(now, true);
        ExplorationContext ctx = build_exploration_context(
            world_, d, snap, scoring_, scenario_.options.max_iterations,
            scenario_.options.same_kind_candidates);

        if (!dump_dir_.empty()) {
            std::filesystem::create_directories(dump_dir_);
            PolicyInput input = build_policy_input(ctx);
            std::ofstream dump(std::filesystem::path(dump_dir_) /
                               ("snapshot_" + std::to_string(now) + "_" +
                                d.disrupted_agent + ".json"));
            dump << build_wire_request(input, std::nullopt) << '\n';
        }

        ExploreResult result = explore(ctx, *policy_);

        ExploreEpisode episode;
        episode.disruption = d;
        const ResourceAgent& disrupted = world_.agents.at(d.disrupted_agent);
        episode.repair_at = disrupted.status.repair_at.value_or(now);
        episode.rounds = result.rounds;
        if (result.output) {
            episode.success = true;
            episode.exploration_agent = result.output->exploration_agent;
            log(now, "explore", d.disrupted_agent, "",
                "selected " + result.output->exploration_agent +
                    " rounds=" + std::to_string(result.rounds));
            MergeRecord record =
                merge_capabilities(world_, result.output->exploration_agent, d,
                                   result.resolved, result.takeover_marked, now);
            log(now, "merge", result.output->exploration_agent, "",
                "gained " + join_events(result.resolved) + " from " + d.disrupted_agent);
            metrics_.merges.push_back(record);
            active_merges_.push_back(std::move(record));
            rebuild_prop_cache();
        } else {
            episode.failure = result.failure;
            log(now, "explore", d.disrupted_agent, "",
                "failed (" + result.failure + ") rounds=" + std::to_string(result.rounds));
        }
        metrics_.explorations.push_back(std::move(episode));
    }
}

void Engine::process_completions(Tick now) {
    for (auto& [id, agent] : world_.agents) {
        for (const Completion& done : tick_complete(agent, now)) {
            completions_now_[id] += 1;
            auto it = parts_.find(done.part_id);
            if (it == parts_.end()) continue;
            PartAgent& part = it->second;
            part.history =
                record_progress(std::move(part.history), done.new_state,
                                done.achieved_props, id);
            part.current_state = done.new_state;
            log(now, "complete", id, part.id, "at=" + done.new_state);

            if (!next_requirement(part.plan, part.history)) {
                part.phase = PartPhase::done;
                part.assigned.reset();
                part.target.reset();
                metrics_.completed_parts += 1;
                metrics_.completion_ticks[part.id] = now;
                log(now, "part-complete", id, part.id,
                    "ticks=" + std::to_string(now - part.released_at));
                continue;
            }

            bool more_queued = std::any_of(
                agent.queue.begin(), agent.queue.end(),
                [&](const QueuedTask& task) { return task.part_id == part.id; });
            if (!more_queued) {
                part.phase = PartPhase::idle;
                part.assigned.reset();
            }
        }
    }
}

std::vector<PartId> Engine::release_parts(Tick now) {
    std::vector<PartId> released;
    for (const ReleaseEntry& entry : scenario_.release) {
        if (entry.tick != now) continue;
        int width = entry.count >= 100 ? 3 : 2;
        for (int i = 1; i <= entry.count; ++i) {
            std::string number = std::to_string(i);
            while (static_cast<int>(number.size()) < width) number = "0" + number;
            PartId pid = entry.prefix + number;

            PartAgent part;
            part.id = pid;
            part.plan = scenario_.plan;
            part.current_state = entry.state;
            part.released_at = now;
            AgentId reporter;
            auto owner = world_.declared_owner.find(entry.state);
            if (owner != world_.declared_owner.end()) {
                reporter = owner->second;
            } else {
                std::set<AgentId> serving = world_.agents_serving(entry.state);
                if (!serving.empty()) reporter = *serving.begin();
            }
            part.history = record_progress(ProductHistory{}, entry.state,
                                           prop_cache_.at(entry.state), reporter);
            parts_.emplace(pid, std::move(part));
            metrics_.released_parts += 1;
            log(now, "release", "", pid, "at=" + entry.state);
            released.push_back(pid);
        }
    }
    return released;
}

int Engine::buffer_occupancy(const StateId& state) const {
    std::set<PartId> occupants;
    for (const auto& [id, part] : parts_) {
        if (part.phase == PartPhase::done || part.phase == PartPhase::failed) continue;
        if (part.current_state == state) occupants.insert(id);
    }
    // Parts heading into the state, whether mid-move or still queued.
    for (const auto& [agent_id, agent] : world_.agents) {
        if (agent.exec && agent.exec->to_state == state) {
            occupants.insert(agent.exec->part_id);
        }
        for (const QueuedTask& task : agent.queue) {
            for (const auto& [key, to] : agent.model.transitions) {
                if (key.second == task.event && to == state) {
                    occupants.insert(task.part_id);
                    break;
                }
            }
        }
    }
    return static_cast<int>(occupants.size());
}

void Engine::bid_attempt_failed(PartAgent& part, Tick now, const std::string& reason) {
    part.failed_attempts += 1;
    if (part.failed_attempts >= scenario_.options.retry_limit) {
        fail_part(part, now, "no feasible path (" + reason + ")");
    }
}

void Engine::run_bidding(Tick now) {
    // Routing view of the environment: events of broken owners are unusable.
    struct NavEdge {
        EventId event;
        StateId to;
        Tick duration;
        AgentId owner;
        EventKind kind;
    };
    std::map<StateId, std::vector<NavEdge>> nav;
    for (const auto& [key, to] : world_.env.transitions) {
        const auto& [from, event_id] = key;
        auto owner_it = world_.env.event_owner.find(event_id);
        if (owner_it == world_.env.event_owner.end()) continue;
        auto agent_it = world_.agents.find(owner_it->second);
        if (agent_it == world_.agents.end() || !agent_it->second.operational()) continue;
        const ProcessEvent& event = world_.env.events.at(event_id);
        nav[from].push_back({event_id, to, event.duration, owner_it->second, event.kind});
    }
    for (auto& [from, edges] : nav) {
        std::sort(edges.begin(), edges.end(),
                  [](const NavEdge& a, const NavEdge& b) { return a.event < b.event; });
    }

    // Parts already heading somewhere, for queue-aware target choice.
    std::map<StateId, int> targeted;
    for (const auto& [id, part] : parts_) {
        if (part.target &&
            (part.phase == PartPhase::committed || part.phase == PartPhase::idle)) {
            targeted[*part.target] += 1;
        }
    }

    for (auto& [pid, part] : parts_) {
        if (part.phase != PartPhase::idle) continue;

        auto req = next_requirement(part.plan, part.history);
        if (!req) {
            part.phase = PartPhase::done;  // defensive; completions handle this
            continue;
        }

        // Goal states satisfying the step.
        std::set<StateId> goals;
        for (const auto& [state, props] : prop_cache_) {
            if (state == part.current_state) continue;
            if (std::includes(props.begin(), props.end(), req->step.props.begin(),
                              req->step.props.end())) {
                goals.insert(state);
            }
        }

        // Full BFS from the part's state over usable events.
        std::map<StateId, std::pair<StateId, const NavEdge*>> parent;
        std::deque<StateId> frontier{part.current_state};
        parent[part.current_state] = {part.current_state, nullptr};
        while (!frontier.empty()) {
            StateId cur = frontier.front();
            frontier.pop_front();
            auto adj = nav.find(cur);
            if (adj == nav.end()) continue;
            for (const NavEdge& edge : adj->second) {
                if (parent.contains(edge.to)) continue;
                parent[edge.to] = {cur, &edge};
                frontier.push_back(edge.to);
            }
        }

        // Pick the reachable goal with the lowest duration + backlog cost.
        std::optional<StateId> best_goal;
        Tick best_cost = 0;
        std::vector<const NavEdge*> best_route;
        for (const StateId& goal : goals) {
            auto hit = parent.find(goal);
            if (hit == parent.end()) continue;
            std::vector<const NavEdge*> route;
            StateId cursor = goal;
            while (cursor != part.current_state) {
                const auto& [prev, edge] = parent.at(cursor);
                route.push_back(edge);
                cursor = prev;
            }
            std::reverse(route.begin(), route.end());
            Tick cost = 0;
            for (const NavEdge* edge : route) cost += edge->duration;
            const NavEdge* last = route.back();
            if (last->kind == EventKind::process) {
                cost += world_.agents.at(last->owner).backlog(now);
                int queued_here = targeted[goal] - (part.target == goal ? 1 : 0);
                cost += static_cast<Tick>(queued_here) * last->duration;
            }
            if (!best_goal || cost < best_cost ||
                (cost == best_cost && goal < *best_goal)) {
                best_goal = goal;
                best_cost = cost;
                best_route = std::move(route);
            }
        }

        if (!best_goal) {
            bid_attempt_failed(part, now,
                               "step " + std::to_string(req->step_index + 1));
            continue;
        }
        if (part.target != best_goal) {
            if (part.target) targeted[*part.target] -= 1;
            part.target = best_goal;
            targeted[*best_goal] += 1;
        }

        // Leg: the longest route prefix owned by one agent.
        const AgentId& leg_owner = best_route.front()->owner;
        StateId leg_end = best_route.front()->to;
        for (std::size_t i = 1; i < best_route.size(); ++i) {
            if (best_route[i]->owner != leg_owner) break;
            leg_end = best_route[i]->to;
        }

        // Capacity-limited buffers defer the award until space frees up;
        // congestion is not a routing failure, so no retry is burned.
        auto capacity = scenario_.buffer_capacity.find(leg_end);
        if (capacity != scenario_.buffer_capacity.end() &&
            buffer_occupancy(leg_end) >= capacity->second) {
            continue;
        }

        BidRequest request;
        request.part_id = pid;
        request.from_state = part.current_state;
        request.required_props =
            leg_end == *best_goal ? req->step.props : PropSet{loc_prop(leg_end)};

        std::optional<AgentId> owner = state_owner(part);
        NeighborTable empty;
        const NeighborTable& table =
            owner ? world_.agents.at(*owner).table : empty;

        std::vector<Bid> bids;
        try {
            bids = solicit_bids(pid, world_.env, request, table, owner,
                                [&](const AgentId& id, const BidRequest& r) {
                                    return evaluate_bid(world_.agents.at(id), r, now);
                                });
        } catch (const SimError& e) {
            if (e.code() != ErrorCode::no_reachable_agents) throw;
            bid_attempt_failed(part, now, "no reachable agents");
            continue;
        }
        for (const Bid& bid : bids) {
            log(now, "bid", bid.bidder, pid,
                "req=" + join_props(request.required_props) +
                    (bid.valid ? " cost=" + std::to_string(bid.completion_cost)
                               : " invalid=" + bid.reason));
        }

        Bid winner;
        try {
            winner = select_bid(bids);
        } catch (const SimError& e) {
            if (e.code() != ErrorCode::all_bids_invalid) throw;
            bid_attempt_failed(part, now, "all bids invalid");
            continue;
        }

        part.phase = PartPhase::committed;
        part.assigned = winner.bidder;
        part.failed_attempts = 0;
        ResourceAgent& agent = world_.agents.at(winner.bidder);
        for (const EventId& event : winner.promised_path) {
            agent.queue.push_back({pid, event});
        }
        log(now, "award", winner.bidder, pid,
            "cost=" + std::to_string(winner.completion_cost) +
                " events=" + std::to_string(winner.promised_path.size()));
    }
}

void Engine::start_work(Tick now) {
    for (auto& [id, agent] : world_.agents) {
        if (!agent.operational()) continue;
        while (!agent.exec && !agent.queue.empty()) {
            QueuedTask task = agent.queue.front();
            auto it = parts_.find(task.part_id);
            if (it == parts_.end() || it->second.phase != PartPhase::committed ||
                it->second.assigned != id) {
                agent.queue.pop_front();
                continue;
            }
            PartAgent& part = it->second;
            try {
                TaskExecution exec =
                    start_event(agent, task.part_id, task.event, part.current_state, now);
                agent.queue.pop_front();
                log(now, "start", id, part.id,
                    "event=" + task.event +
                        " finishes_at=" + std::to_string(exec.finishes_at));
            } catch (const SimError&) {
                // The promised event no longer applies (capability revoked or
                // state drift); drop the whole leg and let the part replan.
                std::erase_if(agent.queue, [&](const QueuedTask& t) {
                    return t.part_id == part.id;
                });
                part.phase = PartPhase::idle;
                part.assigned.reset();
                part.failed_attempts = 0;
            }
        }
    }
}

void Engine::finish_tick(Tick now) {
    (void)now;
    for (auto& [id, agent] : world_.agents) {
        agent.busy.push_back(agent.exec ? 1 : 0);
        auto it = completions_now_.find(id);
        agent.completions.push_back(
            it != completions_now_.end() ? static_cast<std::uint16_t>(it->second) : 0);
    }
    completions_now_.clear();
    metrics_.throughput_series.push_back(metrics_.completed_parts);
}

RunMetrics Engine::run() {
    // Re-runs start from a freshly built world; a previous run may have
    // ended mid-takeover or with accumulated activity history.
    world_ = build_world(scenario_);
    rebuild_prop_cache();
    metrics_ = RunMetrics{};
    metrics_.scenario_name = scenario_.name;
    metrics_.horizon = scenario_.options.horizon;
    parts_.clear();
    active_merges_.clear();
    completions_now_.clear();
    previous_snapshot_ = snapshot(0, false);

    std::vector<Disruption> disruptions;
    for (Tick now = 0; now < scenario_.options.horizon; ++now) {
        inject(now);
        disruptions.clear();
        sample_and_detect(now, disruptions);
        run_exploration(now, disruptions);
        process_completions(now);
        release_parts(now);
        run_bidding(now);
        start_work(now);
        finish_tick(now);
    }
    return std::move(metrics_);
}

}  // namespace mfgsim
