#pragma once

#include <map>
#include <string>
#include <vector>

#include "mfgsim/model.hpp"

namespace mfgsim {

/// Normalization steps applied to a raw factor value before weighting.
/// max_normalize and minmax are computed across the candidate set.
enum class Normalizer { identity, complement, max_normalize, minmax };

struct FactorSpec {
    double weight = 0.0;
    std::vector<Normalizer> pipeline;  // applied left to right

    bool operator==(const FactorSpec&) const = default;
};

/// Weighted-sum suitability scoring: S_i = sum_j w_j * f_j(x_ij).
struct ScoringConfig {
    std::map<std::string, FactorSpec> factors;

    bool operator==(const ScoringConfig&) const = default;

    /// Equal weights over availability, proximity (max-normalized then
    /// complemented) and utilization, with utilization entering positively.
    static ScoringConfig standard(bool utilization_complement = false);
};

struct Candidate {
    AgentId id;
    std::map<std::string, double> factors;
};

struct ScoredCandidate {
    AgentId id;
    double score = 0.0;

    bool operator==(const ScoredCandidate&) const = default;
};

/// Candidates ranked by descending score, ties broken by agent id. Every
/// weighted factor must be present on every candidate (missing_factor
/// otherwise).
std::vector<ScoredCandidate> score_candidates(const std::vector<Candidate>& candidates,
                                              const ScoringConfig& config);

}  // namespace mfgsim
