#pragma once

#include <stdexcept>
#include <string>

namespace mfgsim {

// Errors that indicate a bug or a malformed request: undeclared ids,
// transitions outside the table, contradictory histories. Recoverable
// conditions (unreachable targets, invalid bids) are values, not throws.
enum class ErrorCode {
    unknown_state,
    unknown_event,
    undefined_transition,
    inconsistent_history,
    no_reachable_agents,
    all_bids_invalid,
    agent_broken,
    missing_factor,
    parse_error,
    validation_error,
    incompatible_runs,
    io_error,
    policy_unavailable,
};

class SimError : public std::runtime_error {
public:
    SimError(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mfgsim
