#include <random>

#include "doctest.h"
#include "mfgsim/engine.hpp"
#include "mfgsim/errors.hpp"
#include "mfgsim/explore.hpp"
#include "mfgsim/policy.hpp"
#include "mfgsim/scenario.hpp"
#include "oracles.hpp"

using namespace mfgsim;

namespace {

// Replays a fixed list of responses and counts proposal rounds.
class ScriptedPolicy : public Policy {
public:
    explicit ScriptedPolicy(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string propose(const PolicyInput&,
                        const std::optional<std::string>& feedback) override {
        last_feedback = feedback;
        ++calls;
        std::size_t index = std::min(static_cast<std::size_t>(calls) - 1,
                                     responses_.size() - 1);
        return responses_[index];
    }

    int calls = 0;
    std::optional<std::string> last_feedback;

private:
    std::vector<std::string> responses_;
};

struct Fixture {
    Scenario scenario;
    World world;
    KnowledgeSnapshot snapshot;
    ExplorationContext ctx;

    explicit Fixture(int max_iterations = 3)
        : scenario(load_scenario("example3robot")), world(build_world(scenario)) {
        apply_status(world.agents.at("robot2"), {ResourceMode::broken, 20, 320});
        snapshot.tick = 20;
        for (const auto& [id, agent] : world.agents) {
            AgentSnapshot as;
            as.model = agent.model;
            as.kind = agent.kind;
            as.status = agent.status;
            as.performance = sample_performance(agent, 20, 200);
            snapshot.agents.emplace(id, std::move(as));
        }
        Disruption d;
        d.disrupted_agent = "robot2";
        d.detected_at = 20;
        for (const auto& [s, _] : world.agents.at("robot2").model.states) {
            d.affected_states.insert(s);
        }
        for (const auto& [e, _] : world.agents.at("robot2").model.events) {
            d.affected_events.insert(e);
        }
        ctx = build_exploration_context(world, d, snapshot, ScoringConfig::standard(),
                                        max_iterations, true);
    }
};

std::string good_response() {
    ExplorationOutput output;
    output.exploration_agent = "robot1";
    output.explored_capabilities = {
        {"sigma3", EventKind::transport, 10, {{"reach", 5.0}}},
        {"sigma4", EventKind::transport, 10, {{"reach", 5.0}}},
        {"sigma7", EventKind::transport, 10, {{"reach", 6.5}}},
        {"sigma8", EventKind::transport, 10, {{"reach", 6.5}}},
    };
    output.rationale = "takeover";
    return serialize_output(output);
}

}  // namespace

TEST_CASE("exploration candidates exclude the disrupted and broken agents") {
    Fixture fx;
    std::set<AgentId> ids;
    for (const CandidateInfo& c : fx.ctx.candidates) ids.insert(c.id);
    CHECK(ids == std::set<AgentId>{"robot1", "robot3"});
}

TEST_CASE("parse_output reads a well-formed document") {
    ExplorationOutput output = parse_output(
        R"({"exploration_agent":"robot1",
            "explored_capabilities":[
              {"id":"sigma3","kind":"transport","duration":10,"params":{"reach":5.0}},
              {"id":"sigma4","kind":"transport","duration":10,"params":{"reach":5.0}}],
            "rationale":"closest capable robot"})");
    CHECK(output.exploration_agent == "robot1");
    REQUIRE(output.explored_capabilities.size() == 2);
    CHECK(output.explored_capabilities[0].id == "sigma3");
    CHECK(output.explored_capabilities[1].id == "sigma4");
    CHECK(output.explored_capabilities[0].params.at("reach") == doctest::Approx(5.0));
}

TEST_CASE("parse_output rejects malformed documents") {
    CHECK_THROWS_AS((void)parse_output(""), SimError);
    CHECK_THROWS_AS((void)parse_output("not json"), SimError);
    CHECK_THROWS_AS((void)parse_output(R"({"exploration_agent":"x"})"), SimError);
    CHECK_THROWS_AS(
        (void)parse_output(R"({"exploration_agent":"x","explored_capabilities":[]})"),
        SimError);
    CHECK_THROWS_AS(
        (void)parse_output(
            R"({"exploration_agent":"x","explored_capabilities":[{"kind":"transport"}]})"),
        SimError);
}

TEST_CASE("parse/serialize round-trips to a canonical form") {
    std::mt19937 rng(79);
    std::uniform_int_distribution<int> caps(1, 5), params(0, 3), dur(1, 200);
    std::uniform_real_distribution<double> value(0.0, 50.0);
    for (int round = 0; round < 100; ++round) {
        ExplorationOutput output;
        output.exploration_agent = "agent" + std::to_string(round % 7);
        int n = caps(rng);
        for (int i = 0; i < n; ++i) {
            ProcessEvent event;
            event.id = "cap" + std::to_string(i);
            event.kind = i % 2 == 0 ? EventKind::transport : EventKind::process;
            event.duration = dur(rng);
            int m = params(rng);
            for (int j = 0; j < m; ++j) {
                event.params["p" + std::to_string(j)] = value(rng);
            }
            output.explored_capabilities.push_back(std::move(event));
        }
        output.rationale = "r" + std::to_string(round);

        std::string text = serialize_output(output);
        ExplorationOutput parsed = parse_output(text);
        CHECK(parsed == output);
        CHECK(serialize_output(parsed) == text);
    }
}

TEST_CASE("an unknown agent stays invalid through all rounds") {
    Fixture fx;
    ExplorationOutput bogus;
    bogus.exploration_agent = "nobody";
    bogus.explored_capabilities = {{"sigma3", EventKind::transport, 10, {}}};
    ScriptedPolicy policy({serialize_output(bogus)});
    PolicyInput input = build_policy_input(fx.ctx);
    ValidateResult result = validate(policy, input, fx.ctx);
    CHECK_FALSE(result.valid);
    CHECK(result.rounds == 3);
    CHECK(result.feedback == "Invalid agent");
}

TEST_CASE("an in-bounds proposal validates on the first round") {
    Fixture fx;
    ScriptedPolicy policy({good_response()});
    PolicyInput input = build_policy_input(fx.ctx);
    ValidateResult result = validate(policy, input, fx.ctx);
    CHECK(result.valid);
    CHECK(result.rounds == 1);
    CHECK_FALSE(result.feedback.has_value());
    REQUIRE(result.accepted.has_value());
    CHECK(result.accepted->exploration_agent == "robot1");
}

TEST_CASE("syntax errors feed back and a corrected proposal passes round two") {
    Fixture fx;
    ScriptedPolicy policy({"{{{", good_response()});
    PolicyInput input = build_policy_input(fx.ctx);
    ValidateResult result = validate(policy, input, fx.ctx);
    CHECK(result.valid);
    CHECK(result.rounds == 2);
    CHECK(policy.last_feedback == "Syntax error");
}

TEST_CASE("a bounds violation is rejected with Constraints not met") {
    Fixture fx;
    ExplorationOutput overreach;
    overreach.exploration_agent = "robot3";  // reach bound [0,6] vs 6.5
    overreach.explored_capabilities = {
        {"sigma7", EventKind::transport, 10, {{"reach", 6.5}}},
        {"sigma8", EventKind::transport, 10, {{"reach", 6.5}}},
    };
    ScriptedPolicy policy({serialize_output(overreach), good_response()});
    PolicyInput input = build_policy_input(fx.ctx);
    ValidateResult result = validate(policy, input, fx.ctx);
    CHECK(result.valid);
    CHECK(result.rounds == 2);
    REQUIRE(policy.last_feedback.has_value());
    CHECK(policy.last_feedback->find("Constraints not met") == 0);
    CHECK(policy.last_feedback->find("reach") != std::string::npos);
}

TEST_CASE("validate never exceeds the round budget") {
    for (int n = 1; n <= 5; ++n) {
        Fixture fx(n);
        ScriptedPolicy policy({"broken response"});
        PolicyInput input = build_policy_input(fx.ctx);
        ValidateResult result = validate(policy, input, fx.ctx);
        CHECK_FALSE(result.valid);
        CHECK(result.rounds == n);
        CHECK(policy.calls == n);
    }
}

TEST_CASE("validate accepts a caller-supplied first response without a proposal") {
    Fixture fx;
    ScriptedPolicy policy({"unused"});
    PolicyInput input = build_policy_input(fx.ctx);
    ValidateResult result = validate(policy, input, fx.ctx, good_response());
    CHECK(result.valid);
    CHECK(result.rounds == 1);
    CHECK(policy.calls == 0);
}

TEST_CASE("validate never passes an output violating any declared interval") {
    // Randomized outputs against randomized constraint sets, checked against
    // direct interval membership. 1000 pairs.
    std::mt19937 rng(83);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    for (int round = 0; round < 1000; ++round) {
        Fixture fx(1);
        double reach = value(rng);
        double op_hi = value(rng);
        double safe_hi = value(rng);
        fx.ctx.params.constraints["robot1"].operation_bounds["reach"] = {0.0, op_hi};
        fx.ctx.params.constraints["robot1"].safety_limits["reach"] = {0.0, safe_hi};

        ExplorationOutput output;
        output.exploration_agent = "robot1";
        output.explored_capabilities = {
            {"sigma3", EventKind::transport, 10, {{"reach", reach}}},
            {"sigma4", EventKind::transport, 10, {{"reach", reach}}},
        };
        ScriptedPolicy policy({serialize_output(output)});
        PolicyInput input = build_policy_input(fx.ctx);
        ValidateResult result = validate(policy, input, fx.ctx);

        bool inside = reach <= op_hi && reach <= safe_hi;
        CHECK(result.valid == inside);
        if (!inside) {
            REQUIRE(result.feedback.has_value());
            CHECK(result.feedback->find("Constraints not met") == 0);
        }
    }
}

TEST_CASE("explore on the worked example selects robot1 with the transfer events") {
    Fixture fx;
    BuiltinPolicy policy(ScoringConfig::standard());
    ExploreResult result = explore(fx.ctx, policy);
    REQUIRE(result.output.has_value());
    CHECK(result.output->exploration_agent == "robot1");
    std::set<EventId> granted;
    for (const ProcessEvent& e : result.output->explored_capabilities) {
        granted.insert(e.id);
    }
    CHECK(granted.contains("sigma3"));
    CHECK(granted.contains("sigma4"));
    CHECK(result.takeover_marked == std::set<StateId>{"X5"});
}

TEST_CASE("the builtin policy is byte-deterministic per input") {
    Fixture fx;
    PolicyInput input = build_policy_input(fx.ctx);
    BuiltinPolicy a(ScoringConfig::standard());
    BuiltinPolicy b(ScoringConfig::standard());
    CHECK(a.propose(input, std::nullopt) == b.propose(input, std::nullopt));
    // The winner's takeover covers all of the disrupted agent's duties.
    ExplorationOutput output = parse_output(a.propose(input, std::nullopt));
    CHECK(output.exploration_agent == "robot1");
    CHECK(output.explored_capabilities.size() == 4);
}

TEST_CASE("explore fails cleanly without candidates") {
    Fixture fx;
    fx.ctx.candidates.clear();
    BuiltinPolicy policy(ScoringConfig::standard());
    ExploreResult result = explore(fx.ctx, policy);
    CHECK_FALSE(result.output.has_value());
    CHECK(result.failure == "no eligible candidates");
}

TEST_CASE("takeover marked states are third-party handoffs, with a fallback") {
    Fixture fx;
    std::vector<GrantedEvent> caps = fx.world.takeover_grant("robot2");
    std::set<StateId> marked =
        takeover_marked_states(caps, fx.snapshot, "robot1", "robot2");
    CHECK(marked == std::set<StateId>{"X5"});  // machine1 serves X5

    // With machine1 also broken there is no third party; all destinations
    // qualify.
    KnowledgeSnapshot degraded = fx.snapshot;
    degraded.agents.at("machine1").status.mode = ResourceMode::broken;
    marked = takeover_marked_states(caps, degraded, "robot1", "robot2");
    CHECK(marked == std::set<StateId>{"X4", "X5", "X8"});
}

TEST_CASE("merge extends the explorer and updates the neighbor tables") {
    Fixture fx;
    Disruption d = fx.ctx.disruption;
    std::vector<GrantedEvent> caps = fx.world.takeover_grant("robot2");
    NeighborTable machine1_before = fx.world.agents.at("machine1").table;
    CHECK(machine1_before.entries.at("X5") == std::set<AgentId>{"robot2"});

    MergeRecord record = merge_capabilities(fx.world, "robot1", d, caps, {"X5"}, 20);

    const ResourceAgent& robot1 = fx.world.agents.at("robot1");
    CHECK(robot1.model.events.contains("sigma8"));
    CHECK(robot1.model.transitions.at({"X8", "sigma8"}) == "X5");
    CHECK(fx.world.agents.at("machine1").table.entries.at("X5") ==
          std::set<AgentId>{"robot1", "robot2"});
    CHECK(fx.world.env.event_owner.at("sigma3") == "robot1");

    // The disrupted agent's live model lost the granted events.
    CHECK_FALSE(fx.world.agents.at("robot2").model.events.contains("sigma3"));
    CHECK(record.merged_model == robot1.model);
}

TEST_CASE("merging events the explorer already has changes nothing") {
    Fixture fx;
    std::vector<GrantedEvent> own;
    const ResourceAgent& robot1 = fx.world.agents.at("robot1");
    for (const auto& [key, to] : robot1.model.transitions) {
        own.push_back({robot1.model.events.at(key.second), key.first, to});
    }
    CapabilityModel before = robot1.model;
    Disruption d;
    d.disrupted_agent = "robot2";
    MergeRecord record = merge_capabilities(fx.world, "robot1", d, own, {}, 20);
    CHECK(fx.world.agents.at("robot1").model.events == before.events);
    CHECK(fx.world.agents.at("robot1").model.transitions == before.transitions);
    revoke_capabilities(fx.world, record);
}

TEST_CASE("merged event count is the union size on fuzzed grants") {
    std::mt19937 rng(89);
    std::uniform_int_distribution<int> extra(0, 4), overlap(0, 1);
    for (int round = 0; round < 100; ++round) {
        Fixture fx;
        const ResourceAgent& robot1 = fx.world.agents.at("robot1");
        std::size_t original = robot1.model.events.size();

        std::vector<GrantedEvent> caps;
        std::set<EventId> fresh;
        if (overlap(rng)) {
            caps.push_back({robot1.model.events.at("sigma1"), "X1", "X2"});
        }
        int n = extra(rng);
        for (int i = 0; i < n; ++i) {
            ProcessEvent event{"new" + std::to_string(i), EventKind::transport, 10, {}};
            caps.push_back({event, "X1", "X3"});
            fresh.insert(event.id);
        }
        if (caps.empty()) continue;
        Disruption d;
        d.disrupted_agent = "robot2";
        MergeRecord record = merge_capabilities(fx.world, "robot1", d, caps, {}, 0);
        CHECK(fx.world.agents.at("robot1").model.events.size() ==
              original + fresh.size());
        revoke_capabilities(fx.world, record);
    }
}

TEST_CASE("revoke restores models and neighbor tables exactly") {
    Fixture fx;
    std::map<AgentId, CapabilityModel> models_before;
    std::map<AgentId, NeighborTable> tables_before;
    for (const auto& [id, agent] : fx.world.agents) {
        models_before[id] = agent.model;
        tables_before[id] = agent.table;
    }
    EnvironmentModel env_before = fx.world.env;

    MergeRecord record = merge_capabilities(
        fx.world, "robot1", fx.ctx.disruption, fx.world.takeover_grant("robot2"),
        {"X5"}, 20);
    revoke_capabilities(fx.world, record);

    for (const auto& [id, agent] : fx.world.agents) {
        CHECK(agent.model == models_before.at(id));
        CHECK(agent.table == tables_before.at(id));
    }
    CHECK(fx.world.env == env_before);
}

TEST_CASE("every granted event chains into the takeover marked states") {
    // After a merge, replaying the grant in the merged model must reach a
    // marked state (the independent oracle walks the raw transition table).
    Fixture fx;
    MergeRecord record = merge_capabilities(
        fx.world, "robot1", fx.ctx.disruption, fx.world.takeover_grant("robot2"),
        {"X5"}, 20);
    CapabilityModel merged = record.merged_model;
    for (const GrantedEvent& cap : record.capabilities) {
        CHECK(oracle::reaches_any(merged, cap.to, record.marked));
    }
}
