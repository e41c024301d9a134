#pragma once

#include "tracewise/audit.hpp"
#include "tracewise/instance.hpp"
#include "tracewise/metrics.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spdlog {
class logger;
}

namespace tracewise {

// ---- prompts ------------------------------------------------------------

// Per-kind template with the worked example, question text substituted at
// {{question}}. With template_dir set, <dir>/<kind>.txt replaces the built-in
// text; a missing file throws TemplateMissing.
std::string build_prompt(const TaskInstance& instance, const std::string& template_dir = "");

// The question section alone, payload rendered as in the task statements.
std::string render_question(const TaskInstance& instance);

// Distance table "  | A | B |...", upper triangle filled, '-' elsewhere.
std::string render_distance_table(const ClusteringPayload& p);

// ---- responses ----------------------------------------------------------

struct ResponseRecord {
    std::string instance_id;
    std::size_t run = 0;
    std::string model;
    std::string raw;
    std::optional<std::string> thinking;
    double latency_ms = 0.0;
    std::optional<std::uint64_t> prompt_tokens;
    std::optional<std::uint64_t> completion_tokens;
    std::size_t retries = 0;
};

nlohmann::json record_to_json(const ResponseRecord& r);
ResponseRecord record_from_json(const nlohmann::json& j); // throws FormatError

// JSON Lines. Unknown fields are ignored. Malformed lines throw FormatError
// naming the line; a repeated (instance_id, run, model) or a repeated object
// key throws DuplicateKey.
std::vector<ResponseRecord> ingest_responses(const std::string& path);

// Parses one JSON text, rejecting repeated keys within an object.
nlohmann::json parse_json_strict(const std::string& text);

// ---- synthetic agent ----------------------------------------------------

struct AgentPolicy {
    enum class Type { Perfect, Wanderer, Corrupted } type = Type::Perfect;
    double p_w = 0.0;
    FindingKind corruption = FindingKind::ExecutionError;

    static AgentPolicy perfect() { return {}; }
    static AgentPolicy wanderer(double p_w) { return {Type::Wanderer, p_w, {}}; }
    static AgentPolicy corrupted(FindingKind k) { return {Type::Corrupted, 0.0, k}; }
};

std::string policy_tag(const AgentPolicy& policy);
AgentPolicy parse_policy(const std::string& tag); // "perfect", "wanderer:0.1", "corrupted:ExecutionError"

// Permutations: DFS that, on first arrival at a node below the root, omits
// each child with probability p_w. Other kinds: each non-END directive is
// skipped with probability p_w. Throws InapplicablePolicy.
std::vector<Directive> wanderer_trace(const TaskInstance& instance, const ReferenceSolution& reference,
                                      double p_w, std::uint64_t seed);

ResponseRecord synthetic_agent_respond(const TaskInstance& instance, const AgentPolicy& policy,
                                       std::uint64_t seed);

// ---- live endpoints -----------------------------------------------------

struct ModelEndpoint {
    std::string base_url;                  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string token_env = "TRACEWISE_API_TOKEN"; // variable name, never its value
    double timeout_s = 600.0;
    std::size_t max_retries = 4;
    std::size_t max_concurrency = 4;
    double backoff_initial_s = 1.0;
    std::string system_prompt; // empty: the prompt goes out as one user message
};

struct Sampling {
    double temperature = 0.6;
    double top_p = 0.95;
    std::uint64_t max_tokens = 32768;
};

nlohmann::json endpoint_to_json(const ModelEndpoint& e);
ModelEndpoint endpoint_from_json(const nlohmann::json& j);

// Chat-completion request body for one prompt.
nlohmann::json build_request_body(const ModelEndpoint& endpoint, const std::string& prompt,
                                  const Sampling& sampling);

// Reads content, reasoning text and usage from a chat-completion reply.
// Throws MalformedResponse.
ResponseRecord parse_completion(const std::string& body);

// Issues the request with retry and exponential backoff on 429, 5xx and
// connection failures. At most max_concurrency calls per endpoint are in
// flight across threads. Throws AuthError, Timeout, RateLimited or
// MalformedResponse.
ResponseRecord fetch_completion(const ModelEndpoint& endpoint, const std::string& prompt, const Sampling& sampling);

// ---- campaign -----------------------------------------------------------

struct TaskSpec {
    TaskKind kind = TaskKind::CountingElements;
    // Each parameter is fixed or a range; ranged parameters sweep together,
    // instance i taking lo + i mod (hi - lo + 1).
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> size;
    std::size_t count = 0;
};

struct CampaignConfig {
    std::vector<TaskSpec> tasks;
    std::uint64_t seed = 0;
    std::size_t runs_per_instance = 10;
    enum class Mode { Synthetic, Offline, Live } mode = Mode::Synthetic;
    AgentPolicy policy;                 // synthetic
    std::string model_tag;              // synthetic; defaults to the policy tag
    std::string responses_path;         // offline
    std::string instances_path;         // offline; replaces tasks when set
    std::vector<ModelEndpoint> endpoints; // live
    Sampling sampling;
    std::string template_dir;
    std::string output_dir = "campaign_out";
    unsigned workers = 0; // 0: hardware concurrency
    AuditOptions audit;
};

// JSON tree; see docs/formats.md. Throws ConfigError.
CampaignConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const CampaignConfig& c);
CampaignConfig load_config(const std::string& path);

std::vector<TaskInstance> campaign_instances(const CampaignConfig& config);

struct CampaignResult {
    CampaignSummary summary;
    std::size_t instances = 0;
    std::size_t responses = 0;
    std::size_t endpoint_calls = 0;
    std::size_t resumed = 0; // responses taken from an existing journal
    std::vector<std::string> files;
};

// Writes config.json, instances.jsonl, journal.jsonl, summary.json,
// verdicts.jsonl and curve.csv under output_dir. An existing journal is
// resumed: journaled (instance, run, model) responses are not requested again.
CampaignResult run_campaign(const CampaignConfig& config);

// Audits one response; coverage for permutations.
VerdictRecord audit_record(const TaskInstance& instance, const ReferenceSolution& reference,
                           const ResponseRecord& response, const AuditOptions& options = {});

// Shared logger, stderr by default.
std::shared_ptr<spdlog::logger> harness_logger();
void set_harness_logger(std::shared_ptr<spdlog::logger> logger);

} // namespace tracewise
