#include "mfgsim/policy.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "mfgsim/errors.hpp"

namespace mfgsim {

using nlohmann::json;

BuiltinPolicy::BuiltinPolicy(ScoringConfig config) : config_(std::move(config)) {}

std::string BuiltinPolicy::propose(const PolicyInput& input,
                                   const std::optional<std::string>& feedback) {
    if (input.data_json != last_input_) {
        last_input_ = input.data_json;
        attempt_ = 0;
    } else if (feedback) {
        // Any rejection moves on to the next-ranked candidate.
        ++attempt_;
    }

    json data = json::parse(input.data_json);
    std::vector<Candidate> candidates;
    std::map<AgentId, const json*> details;
    for (const json& entry : data.at("candidates")) {
        Candidate c;
        c.id = entry.at("id").get<std::string>();
        c.factors["availability"] = entry.at("performance").at("availability").get<double>();
        c.factors["utilization"] = entry.at("performance").at("utilization").get<double>();
        c.factors["proximity"] = entry.at("proximity").get<double>();
        details[c.id] = &entry;
        candidates.push_back(std::move(c));
    }
    if (candidates.empty()) {
        throw SimError(ErrorCode::policy_unavailable, "no candidates in data bundle");
    }

    std::vector<ScoredCandidate> ranked = score_candidates(candidates, config_);
    const ScoredCandidate& chosen = ranked[std::min(attempt_, ranked.size() - 1)];

    json response;
    response["exploration_agent"] = chosen.id;
    response["explored_capabilities"] = json::array();
    for (const json& cap : details.at(chosen.id)->at("proposed_capabilities")) {
        json e;
        e["id"] = cap.at("id");
        e["kind"] = cap.at("kind");
        e["duration"] = cap.at("duration");
        e["params"] = cap.at("params");
        response["explored_capabilities"].push_back(std::move(e));
    }
    std::string rationale = "weighted scores:";
    char buf[64];
    for (const ScoredCandidate& s : ranked) {
        std::snprintf(buf, sizeof(buf), " %s=%.4f", s.id.c_str(), s.score);
        rationale += buf;
    }
    rationale += "; selected " + chosen.id;
    if (attempt_ > 0) {
        rationale += " after " + std::to_string(attempt_) + " rejection(s)";
    }
    response["rationale"] = rationale;
    return response.dump();
}

std::string build_wire_request(const PolicyInput& input,
                               const std::optional<std::string>& feedback) {
    json request;
    std::string instructions = input.instructions;
    if (feedback) instructions += "\nFeedback from the previous attempt: " + *feedback;
    request["instructions"] = instructions;
    request["data"] = json::parse(input.data_json);
    request["template"] = input.template_text;
    return request.dump();
}

ServicePolicy::ServicePolicy(ServiceConfig config) : config_(std::move(config)) {}

std::string ServicePolicy::propose(const PolicyInput& input,
                                   const std::optional<std::string>& feedback) {
    // Split "http://host:port/path" into client base and request path.
    std::string url = config_.url;
    std::string::size_type scheme = url.find("://");
    std::string::size_type path_pos =
        scheme == std::string::npos ? url.find('/') : url.find('/', scheme + 3);
    std::string base = path_pos == std::string::npos ? url : url.substr(0, path_pos);
    std::string path = path_pos == std::string::npos ? "/" : url.substr(path_pos);

    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (const char* token = std::getenv(config_.token_env.c_str());
        token && *token != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    auto result = client.Post(path, headers, build_wire_request(input, feedback),
                              "application/json");
    if (!result) {
        throw SimError(ErrorCode::policy_unavailable,
                       "decision service unreachable: " + to_string(result.error()));
    }
    if (result->status != 200) {
        throw SimError(ErrorCode::policy_unavailable,
                       "decision service returned status " +
                           std::to_string(result->status));
    }
    return result->body;
}

}  // namespace mfgsim
