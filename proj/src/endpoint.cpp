#ifdef TRACEWISE_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "tracewise/harness.hpp"

#include "tracewise/error.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

namespace tracewise {

using nlohmann::json;

namespace {

std::mutex g_logger_mutex;
std::shared_ptr<spdlog::logger> g_logger;

// Caps in-flight requests per (base_url, model).
class Gate {
public:
    explicit Gate(std::size_t limit) : free_(std::max<std::size_t>(1, limit)) {}
    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return free_ > 0; });
        --free_;
    }
    void release() {
        {
            std::lock_guard lock(m_);
            ++free_;
        }
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    std::size_t free_;
};

Gate& gate_for(const ModelEndpoint& e) {
    static std::mutex m;
    static std::map<std::string, std::unique_ptr<Gate>> gates;
    std::lock_guard lock(m);
    auto& g = gates[e.base_url + "|" + e.model];
    if (!g)
        g = std::make_unique<Gate>(e.max_concurrency);
    return *g;
}

struct GateHold {
    Gate& g;
    explicit GateHold(Gate& gate) : g(gate) { g.acquire(); }
    ~GateHold() { g.release(); }
};

} // namespace

std::shared_ptr<spdlog::logger> harness_logger() {
    std::lock_guard lock(g_logger_mutex);
    if (!g_logger) {
        g_logger = spdlog::get("tracewise");
        if (!g_logger)
            g_logger = spdlog::stderr_color_mt("tracewise");
    }
    return g_logger;
}

void set_harness_logger(std::shared_ptr<spdlog::logger> logger) {
    std::lock_guard lock(g_logger_mutex);
    g_logger = std::move(logger);
}

json endpoint_to_json(const ModelEndpoint& e) {
    return {{"base_url", e.base_url},
            {"path", e.path},
            {"model", e.model},
            {"token_env", e.token_env},
            {"timeout_s", e.timeout_s},
            {"max_retries", e.max_retries},
            {"max_concurrency", e.max_concurrency},
            {"backoff_initial_s", e.backoff_initial_s},
            {"system_prompt", e.system_prompt}};
}

ModelEndpoint endpoint_from_json(const json& j) {
    ModelEndpoint e;
    try {
        e.base_url = j.at("base_url").get<std::string>();
        e.model = j.at("model").get<std::string>();
        e.path = j.value("path", e.path);
        e.token_env = j.value("token_env", e.token_env);
        e.timeout_s = j.value("timeout_s", e.timeout_s);
        e.max_retries = j.value("max_retries", e.max_retries);
        e.max_concurrency = j.value("max_concurrency", e.max_concurrency);
        e.backoff_initial_s = j.value("backoff_initial_s", e.backoff_initial_s);
        e.system_prompt = j.value("system_prompt", e.system_prompt);
    } catch (const json::exception& ex) {
        fail(ErrorCode::ConfigError, std::string("endpoint: ") + ex.what());
    }
    if (j.contains("token"))
        fail(ErrorCode::ConfigError, "endpoint tokens are read from the environment; set token_env instead");
    return e;
}

json build_request_body(const ModelEndpoint& endpoint, const std::string& prompt, const Sampling& sampling) {
    json messages = json::array();
    if (!endpoint.system_prompt.empty())
        messages.push_back({{"role", "system"}, {"content", endpoint.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", prompt}});
    return {{"model", endpoint.model},
            {"messages", messages},
            {"temperature", sampling.temperature},
            {"top_p", sampling.top_p},
            {"max_tokens", sampling.max_tokens}};
}

ResponseRecord parse_completion(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedResponse, std::string("reply is not JSON: ") + e.what());
    }
    ResponseRecord r;
    try {
        const auto& msg = j.at("choices").at(0).at("message");
        const auto& content = msg.at("content");
        r.raw = content.is_string() ? content.get<std::string>() : std::string();
        for (const char* key : {"reasoning_content", "reasoning", "thinking"})
            if (msg.contains(key) && msg[key].is_string()) {
                r.thinking = msg[key].get<std::string>();
                break;
            }
        if (j.contains("usage") && j["usage"].is_object()) {
            const auto& u = j["usage"];
            if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_unsigned())
                r.prompt_tokens = u["prompt_tokens"].get<std::uint64_t>();
            if (u.contains("completion_tokens") && u["completion_tokens"].is_number_unsigned())
                r.completion_tokens = u["completion_tokens"].get<std::uint64_t>();
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedResponse, std::string("reply lacks choices[0].message.content: ") + e.what());
    }
    return r;
}

ResponseRecord fetch_completion(const ModelEndpoint& endpoint, const std::string& prompt, const Sampling& sampling) {
    const char* token = std::getenv(endpoint.token_env.c_str());
    if (!token || !*token)
        fail(ErrorCode::AuthError, "environment variable " + endpoint.token_env + " is not set");
    auto log = harness_logger();
    const auto body = build_request_body(endpoint, prompt, sampling).dump();
    httplib::Headers headers{{"Authorization", std::string("Bearer ") + token}};

    GateHold hold(gate_for(endpoint));
    httplib::Client client(endpoint.base_url);
    const auto secs = static_cast<time_t>(endpoint.timeout_s);
    const auto usecs = static_cast<time_t>((endpoint.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    double backoff = endpoint.backoff_initial_s;
    std::string last_problem;
    bool last_rate_limited = false;
    for (std::size_t attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
        if (attempt > 0) {
            log->warn("{} attempt {} of {} after {}; retrying in {:.3f}s", endpoint.model, attempt + 1,
                      endpoint.max_retries + 1, last_problem, backoff);
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2.0;
        }
        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(endpoint.path, headers, body, "application/json");
        const double latency =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        if (!res) {
            last_problem = "transport error: " + httplib::to_string(res.error());
            last_rate_limited = false;
            continue;
        }
        if (res->status == 401 || res->status == 403)
            fail(ErrorCode::AuthError, endpoint.model + " rejected the credentials (HTTP " +
                                           std::to_string(res->status) + ")");
        if (res->status == 429 || res->status >= 500) {
            last_problem = "HTTP " + std::to_string(res->status);
            last_rate_limited = res->status == 429;
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            fail(ErrorCode::MalformedResponse,
                 endpoint.model + " answered HTTP " + std::to_string(res->status));
        auto record = parse_completion(res->body);
        record.model = endpoint.model;
        record.latency_ms = latency;
        record.retries = attempt;
        if (attempt > 0)
            log->info("{} succeeded after {} retries", endpoint.model, attempt);
        return record;
    }
    if (last_rate_limited)
        fail(ErrorCode::RateLimited, endpoint.model + " kept rate limiting after " +
                                         std::to_string(endpoint.max_retries) + " retries");
    fail(ErrorCode::Timeout, endpoint.model + " unavailable after " + std::to_string(endpoint.max_retries + 1) +
                                 " attempts: " + last_problem);
}

} // namespace tracewise
