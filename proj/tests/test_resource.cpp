#include <algorithm>
#include <random>

#include "doctest.h"
#include "mfgsim/errors.hpp"
#include "mfgsim/resource.hpp"
#include "mfgsim/scenario.hpp"
#include "oracles.hpp"

using namespace mfgsim;

namespace {

// One machine with a single process slot, modeled on the case-study
// process times.
ResourceAgent machine_with(const std::string& process, Tick duration) {
    ResourceAgent agent;
    agent.id = "M";
    agent.kind = AgentKind::machine;
    agent.model.states["in"] = {"in", ""};
    agent.model.states["out"] = {"out", ""};
    agent.model.physical_props["out"] = {process};
    agent.model.events["op"] = {"op", EventKind::process, duration, {}};
    agent.model.transitions[{"in", "op"}] = "out";
    agent.model.initial_state = "in";
    agent.pristine_model = agent.model;
    return agent;
}

}  // namespace

TEST_CASE("start_event schedules exactly the process time") {
    // Case-study process times: P1 at tick 10 finishes at 160, P6 at 0 at 20.
    ResourceAgent p1 = machine_with("P1", 150);
    TaskExecution exec = start_event(p1, "part", "op", "in", 10);
    CHECK(exec.finishes_at == 160);
    CHECK(exec.to_state == "out");

    ResourceAgent p6 = machine_with("P6", 20);
    exec = start_event(p6, "part", "op", "in", 0);
    CHECK(exec.finishes_at == 20);
}

TEST_CASE("start_event rejects broken agents and unknown events") {
    ResourceAgent agent = machine_with("P1", 150);
    CHECK_THROWS_AS((void)start_event(agent, "part", "nope", "in", 0), SimError);
    agent.status.mode = ResourceMode::broken;
    CHECK_THROWS_AS((void)start_event(agent, "part", "op", "in", 0), SimError);
}

TEST_CASE("tick_complete fires exactly at the finish tick") {
    ResourceAgent agent = machine_with("P1", 150);
    start_event(agent, "part", "op", "in", 10);
    CHECK(tick_complete(agent, 159).empty());
    std::vector<Completion> done = tick_complete(agent, 160);
    REQUIRE(done.size() == 1);
    CHECK(done[0].part_id == "part");
    CHECK(done[0].new_state == "out");
    CHECK(done[0].achieved_props.contains("P1"));
    CHECK_FALSE(agent.exec.has_value());
    CHECK(tick_complete(agent, 160).empty());
}

TEST_CASE("tick_complete with no work returns nothing") {
    ResourceAgent agent = machine_with("P2", 60);
    CHECK(tick_complete(agent, 0).empty());
}

TEST_CASE("completions across a random schedule match a calendar oracle") {
    std::mt19937 rng(53);
    std::uniform_int_distribution<Tick> dur(1, 9), gap(0, 3);
    for (int round = 0; round < 50; ++round) {
        ResourceAgent agent = machine_with("P", 1);
        // Scripted sequence of back-to-back executions with idle gaps.
        struct Job {
            Tick start;
            Tick finish;
        };
        std::vector<Job> jobs;
        Tick t = 0;
        for (int i = 0; i < 10; ++i) {
            t += gap(rng);
            Tick d = dur(rng);
            jobs.push_back({t, t + d});
            t += d;
        }
        std::vector<Tick> completions;
        std::size_t next = 0;
        for (Tick now = 0; now <= t + 1; ++now) {
            for (const Completion& c : tick_complete(agent, now)) {
                (void)c;
                completions.push_back(now);
            }
            if (!agent.exec && next < jobs.size() && jobs[next].start == now) {
                agent.model.events["op"].duration = jobs[next].finish - jobs[next].start;
                start_event(agent, "part" + std::to_string(next), "op", "in", now);
                ++next;
            }
        }
        std::vector<Tick> expected;
        for (const Job& job : jobs) expected.push_back(job.finish);
        CHECK(completions == expected);
    }
}

TEST_CASE("busy-ticks accounting matches completed execution spans") {
    ResourceAgent agent = machine_with("P", 1);
    std::vector<std::pair<Tick, Tick>> jobs{{0, 7}, {10, 12}, {12, 20}};
    Tick total = 0;
    std::size_t next = 0;
    for (Tick now = 0; now <= 21; ++now) {
        tick_complete(agent, now);
        if (!agent.exec && next < jobs.size() && jobs[next].first == now) {
            agent.model.events["op"].duration = jobs[next].second - jobs[next].first;
            start_event(agent, "p", "op", "in", now);
            total += jobs[next].second - jobs[next].first;
            ++next;
        }
        agent.busy.push_back(agent.exec ? 1 : 0);
    }
    Tick busy_ticks = 0;
    for (std::uint8_t b : agent.busy) busy_ticks += b;
    CHECK(busy_ticks == total);
}

TEST_CASE("apply_status going broken fails the in-flight part") {
    ResourceAgent agent = machine_with("P1", 150);
    start_event(agent, "w1", "op", "in", 0);
    ResourceStatus broken{ResourceMode::broken, 5, 55};
    std::vector<PartId> failed = apply_status(agent, broken);
    CHECK(failed == std::vector<PartId>{"w1"});
    CHECK_FALSE(agent.exec.has_value());
    CHECK_FALSE(agent.operational());
}

TEST_CASE("apply_status is idempotent") {
    ResourceAgent agent = machine_with("P1", 150);
    ResourceStatus broken{ResourceMode::broken, 5, 55};
    apply_status(agent, broken);
    CHECK(apply_status(agent, broken).empty());
    ResourceStatus fixed{ResourceMode::operational, {}, {}};
    apply_status(agent, fixed);
    CHECK(apply_status(agent, fixed).empty());
}

TEST_CASE("repair restores the pristine capability model") {
    ResourceAgent agent = machine_with("P1", 150);
    CapabilityModel pristine = agent.model;
    // Capability churn while broken: events deactivated by a takeover.
    apply_status(agent, {ResourceMode::broken, 5, 55});
    agent.model.events.clear();
    agent.model.transitions.clear();
    apply_status(agent, {ResourceMode::operational, {}, {}});
    CHECK(agent.model == pristine);
}

TEST_CASE("evaluate_bid sets the bid-scoped initial and marked states") {
    ResourceAgent agent = machine_with("P1", 150);
    BidRequest req{"part", {"P1"}, "in", std::nullopt};
    Bid bid = evaluate_bid(agent, req, 0);
    REQUIRE(bid.valid);
    CHECK(agent.model.initial_state == "in");
    CHECK(agent.model.marked_states == std::set<StateId>{"out"});
    CHECK(bid.promised_path == std::vector<EventId>{"op"});
    CHECK(bid.completion_cost == 150);
}

TEST_CASE("evaluate_bid adds the queue backlog to the cost") {
    ResourceAgent agent = machine_with("P1", 150);
    start_event(agent, "w1", "op", "in", 0);
    agent.queue.push_back({"w2", "op"});
    BidRequest req{"w3", {"P1"}, "in", std::nullopt};
    Bid bid = evaluate_bid(agent, req, 30);
    REQUIRE(bid.valid);
    // 120 remaining + 150 queued + 150 own path.
    CHECK(bid.completion_cost == 420);
}

TEST_CASE("evaluate_bid is invalid when no state satisfies the request") {
    ResourceAgent agent = machine_with("P1", 150);
    BidRequest req{"part", {"P9"}, "in", std::nullopt};
    Bid bid = evaluate_bid(agent, req, 0);
    CHECK_FALSE(bid.valid);
    CHECK(bid.reason == "no satisfying state");
}

TEST_CASE("a broken agent bids invalid with the reason recorded") {
    ResourceAgent agent = machine_with("P1", 150);
    apply_status(agent, {ResourceMode::broken, 0, 100});
    BidRequest req{"part", {"P1"}, "in", std::nullopt};
    Bid bid = evaluate_bid(agent, req, 0);
    CHECK_FALSE(bid.valid);
    CHECK(bid.reason == "AgentBroken");
}

TEST_CASE("the worked example: broken robot2 gives an invalid bid") {
    Scenario scenario = load_scenario("example3robot");
    World world = build_world(scenario);
    ResourceAgent& robot2 = world.agents.at("robot2");
    apply_status(robot2, {ResourceMode::broken, 20, 320});
    BidRequest req{"A01", {loc_prop("X5")}, "X3", std::nullopt};
    Bid bid = evaluate_bid(robot2, req, 25);
    CHECK_FALSE(bid.valid);
    CHECK(bid.reason == "AgentBroken");
}

TEST_CASE("bid validity equals a reachability oracle on fuzzed models") {
    std::mt19937 rng(59);
    for (int round = 0; round < 100; ++round) {
        ResourceAgent agent;
        agent.id = "R";
        agent.model = oracle::random_dag_model(rng, 7, 12);
        agent.pristine_model = agent.model;
        // Request one concrete state by its location property.
        std::uniform_int_distribution<int> pick(0, 6);
        StateId from = "s" + std::to_string(pick(rng));
        StateId goal = "s" + std::to_string(pick(rng));
        BidRequest req{"part", {loc_prop(goal)}, from, std::nullopt};
        Bid bid = evaluate_bid(agent, req, 0);

        bool reachable = goal != from &&
                         oracle::reaches_any(agent.model, from, {goal});
        CHECK(bid.valid == reachable);
        if (bid.valid) {
            StateId cursor = from;
            for (const EventId& event : bid.promised_path) {
                cursor = apply_transition(agent.model, cursor, event);
            }
            CHECK(cursor == goal);
        }
    }
}

TEST_CASE("a broken agent never completes work") {
    ResourceAgent agent = machine_with("P1", 150);
    start_event(agent, "w1", "op", "in", 0);
    apply_status(agent, {ResourceMode::broken, 100, 200});
    for (Tick t = 100; t < 200; ++t) {
        CHECK(tick_complete(agent, t).empty());
    }
}
