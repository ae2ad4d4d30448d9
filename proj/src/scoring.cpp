#include "mfgsim/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfgsim/errors.hpp"

namespace mfgsim {

ScoringConfig ScoringConfig::standard(bool utilization_complement) {
    ScoringConfig config;
    const double w = 1.0 / 3.0;
    config.factors["availability"] = {w, {Normalizer::identity}};
    config.factors["proximity"] = {w, {Normalizer::max_normalize, Normalizer::complement}};
    config.factors["utilization"] =
        {w, utilization_complement ? std::vector<Normalizer>{Normalizer::complement}
                                   : std::vector<Normalizer>{Normalizer::identity}};
    return config;
}

std::vector<ScoredCandidate> score_candidates(const std::vector<Candidate>& candidates,
                                              const ScoringConfig& config) {
    // Cross-candidate extrema, needed by max_normalize / minmax.
    std::map<std::string, std::pair<double, double>> extrema;
    for (const auto& [factor, spec] : config.factors) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const Candidate& c : candidates) {
            auto it = c.factors.find(factor);
            if (it == c.factors.end()) {
                throw SimError(ErrorCode::missing_factor,
                               c.id + " missing factor " + factor);
            }
            lo = std::min(lo, it->second);
            hi = std::max(hi, it->second);
        }
        extrema[factor] = {lo, hi};
    }

    auto normalize = [&](const std::string& factor, const FactorSpec& spec, double x) {
        auto [lo, hi] = extrema[factor];
        for (Normalizer n : spec.pipeline) {
            switch (n) {
                case Normalizer::identity:
                    break;
                case Normalizer::complement:
                    x = 1.0 - x;
                    break;
                case Normalizer::max_normalize:
                    x = hi != 0.0 ? x / hi : 0.0;
                    break;
                case Normalizer::minmax:
                    x = hi != lo ? (x - lo) / (hi - lo) : 0.0;
                    break;
            }
        }
        return x;
    };

    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.size());
    for (const Candidate& c : candidates) {
        double score = 0.0;
        for (const auto& [factor, spec] : config.factors) {
            score += spec.weight * normalize(factor, spec, c.factors.at(factor));
        }
        scored.push_back({c.id, score});
    }
    std::sort(scored.begin(), scored.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.id < b.id;
              });
    return scored;
}

}  // namespace mfgsim
