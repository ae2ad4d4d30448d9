#include <random>

#include "doctest.h"
#include "mfgsim/errors.hpp"
#include "mfgsim/scoring.hpp"

using namespace mfgsim;

namespace {

Candidate candidate(const AgentId& id, double availability, double proximity,
                    double utilization) {
    Candidate c;
    c.id = id;
    c.factors = {{"availability", availability},
                 {"proximity", proximity},
                 {"utilization", utilization}};
    return c;
}

}  // namespace

TEST_CASE("the worked-example pair ranks R1 over R2 with the expected scores") {
    // Prompt data: R1 proximity 2 / utilization .92, R2 proximity 6 / .35,
    // both available, equal weights, proximity max-normalized then
    // complemented. Expected: (1 + 2/3 + 0.92)/3 and (1 + 0 + 0.35)/3.
    std::vector<Candidate> candidates{candidate("R1", 1, 2, 0.92),
                                      candidate("R2", 1, 6, 0.35)};
    auto ranked = score_candidates(candidates, ScoringConfig::standard());
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].id == "R1");
    CHECK(ranked[0].score == doctest::Approx(0.862222).epsilon(1e-3));
    CHECK(ranked[1].id == "R2");
    CHECK(ranked[1].score == doctest::Approx(0.45).epsilon(1e-3));
}

TEST_CASE("a single candidate ranks first regardless of weights") {
    ScoringConfig config = ScoringConfig::standard();
    config.factors["utilization"].weight = 17.0;
    auto ranked = score_candidates({candidate("only", 1, 3, 0.5)}, config);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].id == "only");
}

TEST_CASE("ties rank lexicographically by agent id") {
    auto ranked = score_candidates(
        {candidate("zeta", 1, 4, 0.5), candidate("alpha", 1, 4, 0.5)},
        ScoringConfig::standard());
    CHECK(ranked[0].id == "alpha");
    CHECK(ranked[0].score == doctest::Approx(ranked[1].score));
}

TEST_CASE("a missing factor is an error") {
    Candidate broken;
    broken.id = "X";
    broken.factors = {{"availability", 1.0}};
    CHECK_THROWS_AS((void)score_candidates({broken}, ScoringConfig::standard()),
                    SimError);
}

TEST_CASE("utilization can enter in complement form") {
    ScoringConfig config = ScoringConfig::standard(true);
    auto ranked = score_candidates(
        {candidate("busy", 1, 2, 0.9), candidate("idle", 1, 2, 0.1)}, config);
    CHECK(ranked[0].id == "idle");
}

TEST_CASE("scaling all weights leaves the ranking unchanged") {
    std::mt19937 rng(73);
    std::uniform_real_distribution<double> unit(0.0, 1.0), hops(0.0, 9.0),
        scale(0.01, 50.0);
    std::uniform_int_distribution<int> count(2, 10);
    for (int round = 0; round < 100; ++round) {
        std::vector<Candidate> candidates;
        int n = count(rng);
        for (int i = 0; i < n; ++i) {
            candidates.push_back(candidate("a" + std::to_string(i), 1.0, hops(rng),
                                           unit(rng)));
        }
        ScoringConfig config = ScoringConfig::standard();
        auto baseline = score_candidates(candidates, config);

        double c = scale(rng);
        ScoringConfig scaled = config;
        for (auto& [factor, spec] : scaled.factors) spec.weight *= c;
        auto rescored = score_candidates(candidates, scaled);

        REQUIRE(baseline.size() == rescored.size());
        for (std::size_t i = 0; i < baseline.size(); ++i) {
            CHECK(baseline[i].id == rescored[i].id);
        }
    }
}

TEST_CASE("minmax normalization maps the span onto the unit interval") {
    ScoringConfig config;
    config.factors["speed"] = {1.0, {Normalizer::minmax}};
    std::vector<Candidate> candidates;
    for (double v : {2.0, 6.0, 10.0}) {
        Candidate c;
        c.id = "v" + std::to_string(static_cast<int>(v));
        c.factors["speed"] = v;
        candidates.push_back(c);
    }
    auto ranked = score_candidates(candidates, config);
    CHECK(ranked[0].score == doctest::Approx(1.0));
    CHECK(ranked[1].score == doctest::Approx(0.5));
    CHECK(ranked[2].score == doctest::Approx(0.0));
}
