#pragma once

#include <memory>
#include <optional>
#include <string>

#include "mfgsim/explore.hpp"
#include "mfgsim/scoring.hpp"

namespace mfgsim {

/// A decision service: given the structured input (and feedback from a
/// failed round), produce a response document that should match the output
/// template. Implementations must be deterministic per (input, feedback
/// history) to keep runs reproducible; the builtin policy is, the external
/// service is whatever the service is.
class Policy {
public:
    virtual ~Policy() = default;

    /// Throws policy_unavailable when the backing service cannot answer.
    virtual std::string propose(const PolicyInput& input,
                                const std::optional<std::string>& feedback) = 0;
};

/// Deterministic weighted-scoring policy. Ranks the candidates in the input
/// bundle and answers with the best one; each piece of feedback moves to
/// the next-ranked candidate.
class BuiltinPolicy : public Policy {
public:
    explicit BuiltinPolicy(ScoringConfig config);

    std::string propose(const PolicyInput& input,
                        const std::optional<std::string>& feedback) override;

private:
    ScoringConfig config_;
    std::string last_input_;
    std::size_t attempt_ = 0;
};

struct ServiceConfig {
    std::string url;
    std::string token_env = "MFGSIM_SERVICE_TOKEN";
    int timeout_seconds = 30;
};

/// Adapter speaking the decision-service wire protocol: one HTTP POST of a
/// JSON body per proposal round.
class ServicePolicy : public Policy {
public:
    explicit ServicePolicy(ServiceConfig config);

    std::string propose(const PolicyInput& input,
                        const std::optional<std::string>& feedback) override;

private:
    ServiceConfig config_;
};

/// Request body for one proposal round, as sent on the wire.
std::string build_wire_request(const PolicyInput& input,
                               const std::optional<std::string>& feedback);

}  // namespace mfgsim
