#include <httplib.h>

#include <doctest.h>

#include "tracewise/error.hpp"
#include "tracewise/harness.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

using namespace tracewise;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTokenEnv = "TRACEWISE_TEST_TOKEN";
constexpr const char* kToken = "sk-dummy-0123456789abcdef";

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("tracewise_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Chat-completion stand-in. Fails the first `fail_first` requests with 429,
// then answers with a perfect trace taken from the prompt's instance.
class MockServer {
public:
    explicit MockServer(int fail_first = 0) : fail_left_(fail_first) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            if (req.get_header_value("Authorization") != std::string("Bearer ") + kToken) {
                res.status = 401;
                return;
            }
            if (fail_left_ > 0) {
                --fail_left_;
                res.status = 429;
                return;
            }
            nlohmann::json reply{
                {"choices", {{{"message", {{"content", "<answer>\nEND()==0\n</answer>"}, {"reasoning_content", "ok"}}}}}},
                {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 5}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::atomic<int> requests{0};

private:
    httplib::Server server_;
    std::thread thread_;
    std::atomic<int> fail_left_;
    int port_ = 0;
};

ModelEndpoint endpoint(const std::string& url) {
    ModelEndpoint e;
    e.base_url = url;
    e.model = "mock-model";
    e.token_env = kTokenEnv;
    e.timeout_s = 2.0;
    e.max_retries = 3;
    e.backoff_initial_s = 0.01;
    return e;
}

struct CapturedLog {
    std::ostringstream out;
    CapturedLog() {
        auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(out);
        set_harness_logger(std::make_shared<spdlog::logger>("capture", sink));
    }
    ~CapturedLog() { set_harness_logger(nullptr); }
};

CampaignConfig permutation_config(const fs::path& out) {
    CampaignConfig c;
    TaskSpec t;
    t.kind = TaskKind::PermutationWithDuplicates;
    t.size = {{"length", {3, 5}}, {"distinct", {3, 5}}};
    t.count = 6;
    c.tasks = {t};
    c.seed = 11;
    c.runs_per_instance = 3;
    c.policy = AgentPolicy::wanderer(0.2);
    c.output_dir = out.string();
    c.workers = 3;
    return c;
}

} // namespace

TEST_CASE("synthetic campaigns are byte-deterministic") {
    auto a = permutation_config(scratch("camp_a"));
    auto b = permutation_config(scratch("camp_b"));
    b.workers = 1;
    auto ra = run_campaign(a);
    auto rb = run_campaign(b);
    CHECK(ra.instances == 6);
    CHECK(ra.responses == 18);
    for (const char* f : {"summary.json", "verdicts.jsonl", "curve.csv", "instances.jsonl", "journal.jsonl"}) {
        CAPTURE(f);
        CHECK(slurp(fs::path(a.output_dir) / f) == slurp(fs::path(b.output_dir) / f));
    }
    CHECK(slurp(fs::path(a.output_dir) / "curve.csv").rfind("model,solution_space_size,mean_coverage,std\n", 0) == 0);

    SUBCASE("reports rebuild from the verdict log") {
        auto again = scratch("camp_report");
        emit_reports(aggregate_campaign(load_verdicts((fs::path(a.output_dir) / "verdicts.jsonl").string())),
                     again.string());
        for (const char* f : {"summary.json", "verdicts.jsonl", "curve.csv"}) {
            CAPTURE(f);
            CHECK(slurp(again / f) == slurp(fs::path(a.output_dir) / f));
        }
    }
}

TEST_CASE("config round-trip and validation") {
    auto c = permutation_config("out");
    auto back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    auto bad = config_to_json(c);
    bad["mode"] = "telepathy";
    CHECK_THROWS_AS(config_from_json(bad), Error);
    auto with_token = config_to_json(c);
    with_token["endpoints"] = {{{"base_url", "http://x"}, {"model", "m"}, {"token", kToken}}};
    CHECK_THROWS_AS(config_from_json(with_token), Error);
}

TEST_CASE("lockstep size sweep") {
    auto c = permutation_config("out");
    auto insts = campaign_instances(c);
    REQUIRE(insts.size() == 6);
    CHECK(insts[0].size.at("length") == 3);
    CHECK(insts[1].size.at("length") == 4);
    CHECK(insts[3].size.at("length") == 3);
    CHECK(insts[2].size.at("distinct") == 5);
}

TEST_CASE("a campaign with no instances still reports") {
    auto c = permutation_config(scratch("camp_empty"));
    c.tasks[0].count = 0;
    auto r = run_campaign(c);
    CHECK(r.instances == 0);
    CHECK(r.summary.groups.empty());
    CHECK(fs::exists(fs::path(c.output_dir) / "summary.json"));
    CHECK(fs::exists(fs::path(c.output_dir) / "curve.csv"));
}

TEST_CASE("offline responses are audited") {
    auto dir = scratch("camp_offline");
    fs::create_directories(dir);
    auto inst = make_instance(TaskKind::PrimeFactorization, FactorizationPayload{12});
    std::ofstream(dir / "instances.in.jsonl") << instance_to_json(inst).dump() << "\n";
    ResponseRecord good{inst.instance_id, 0, "m", "<answer>\nSTATE(12);\nATTEMPT(12,2)==True;\nSTATE(6);\n"
                                                    "ATTEMPT(6,2)==True;\nSTATE(3);\nATTEMPT(3,2)==False;\n"
                                                    "ATTEMPT(3,3)==True;\nSTATE(1);\nEND()==[2,2,3];\n</answer>"};
    ResponseRecord bad{inst.instance_id, 1, "m", "<answer>\nEND()==[2,6];\n</answer>"};
    ResponseRecord stray{"nope", 0, "m", "x"};
    std::ofstream(dir / "responses.jsonl") << record_to_json(good).dump() << "\n"
                                           << record_to_json(bad).dump() << "\n"
                                           << record_to_json(stray).dump() << "\n";
    CampaignConfig c;
    c.mode = CampaignConfig::Mode::Offline;
    c.instances_path = (dir / "instances.in.jsonl").string();
    c.responses_path = (dir / "responses.jsonl").string();
    c.output_dir = (dir / "out").string();
    CapturedLog log;
    auto r = run_campaign(c);
    CHECK(r.responses == 2);
    REQUIRE(r.summary.groups.size() == 1);
    CHECK(r.summary.groups[0].accuracy == doctest::Approx(0.5));
    CHECK(r.summary.records[1].verdict.has(FindingKind::WrongAnswer));
}

TEST_CASE("endpoint retries through rate limiting") {
    ::setenv(kTokenEnv, kToken, 1);
    MockServer server(2);
    CapturedLog log;
    auto r = fetch_completion(endpoint(server.url()), "prompt", Sampling{});
    CHECK(server.requests == 3);
    CHECK(r.retries == 2);
    CHECK(r.raw.find("END()==0") != std::string::npos);
    CHECK(r.thinking == std::optional<std::string>("ok"));
    CHECK(r.prompt_tokens == std::optional<std::uint64_t>(11));
    CHECK(log.out.str().find("retrying") != std::string::npos);
    CHECK(log.out.str().find(kToken) == std::string::npos);
}

TEST_CASE("endpoint failures") {
    ::setenv(kTokenEnv, kToken, 1);
    CapturedLog log;
    SUBCASE("rate limited to exhaustion") {
        MockServer server(100);
        try {
            fetch_completion(endpoint(server.url()), "p", Sampling{});
            FAIL("expected RateLimited");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::RateLimited);
        }
        CHECK(server.requests == 4);
    }
    SUBCASE("unreachable host") {
        auto e = endpoint("http://127.0.0.1:1");
        e.max_retries = 1;
        e.timeout_s = 0.5;
        try {
            fetch_completion(e, "p", Sampling{});
            FAIL("expected Timeout");
        } catch (const Error& err) {
            CHECK(err.code() == ErrorCode::Timeout);
        }
    }
    SUBCASE("missing or rejected credentials") {
        MockServer server;
        auto e = endpoint(server.url());
        e.token_env = "TRACEWISE_TEST_TOKEN_UNSET";
        CHECK_THROWS_AS(fetch_completion(e, "p", Sampling{}), Error);
        ::setenv("TRACEWISE_TEST_TOKEN_WRONG", "sk-wrong", 1);
        e.token_env = "TRACEWISE_TEST_TOKEN_WRONG";
        try {
            fetch_completion(e, "p", Sampling{});
            FAIL("expected AuthError");
        } catch (const Error& err) {
            CHECK(err.code() == ErrorCode::AuthError);
            CHECK(std::string(err.what()).find("sk-wrong") == std::string::npos);
        }
    }
    SUBCASE("malformed reply") {
        CHECK_THROWS_AS(parse_completion("{\"choices\":[]}"), Error);
        CHECK_THROWS_AS(parse_completion("not json"), Error);
    }
    CHECK(log.out.str().find(kToken) == std::string::npos);
}

TEST_CASE("live campaign resumes without repeating calls and never writes the token") {
    ::setenv(kTokenEnv, kToken, 1);
    MockServer server;
    auto out = scratch("camp_live");
    CampaignConfig c;
    TaskSpec t;
    t.kind = TaskKind::CountingElements;
    t.size = {{"length", {5, 5}}};
    t.count = 3;
    c.tasks = {t};
    c.runs_per_instance = 2;
    c.mode = CampaignConfig::Mode::Live;
    c.endpoints = {endpoint(server.url())};
    c.output_dir = out.string();
    CapturedLog log;
    auto first = run_campaign(c);
    CHECK(first.endpoint_calls == 6);
    CHECK(server.requests == 6);
    auto second = run_campaign(c);
    CHECK(second.endpoint_calls == 0);
    CHECK(second.resumed == 6);
    CHECK(server.requests == 6);
    CHECK(second.responses == 6);

    for (const auto& entry : fs::recursive_directory_iterator(out))
        if (entry.is_regular_file()) {
            CAPTURE(entry.path().string());
            CHECK(slurp(entry.path()).find(kToken) == std::string::npos);
        }
    CHECK(log.out.str().find(kToken) == std::string::npos);
}

TEST_CASE("offline campaign over the transcribed fixtures") {
    const fs::path dir = fs::path(TRACEWISE_FIXTURE_DIR) / "offline";
    CHECK(ingest_responses((dir / "responses.jsonl").string()).size() == 8);
    auto c = load_config((dir / "campaign.json").string());
    CHECK(c.mode == CampaignConfig::Mode::Offline);
    c.output_dir = scratch("camp_fixtures").string();
    auto r = run_campaign(c);
    CHECK(r.responses == 8);
    const std::map<std::string, std::vector<FindingKind>> annotated{
        {"d1_counting", {FindingKind::BoundaryViolation}},
        {"d2_sliding", {FindingKind::ProcedureOmission}},
        {"d3_permutation", {FindingKind::IncorrectBacktracking}},
        {"d4_game24", {FindingKind::StateRevisitation}},
        {"d5_game24", {FindingKind::InfiniteSelfLoop, FindingKind::Incomplete}},
        {"d6_clustering", {FindingKind::StateStaleness}},
        {"d7_factorization", {FindingKind::ExecutionError}},
        {"d8_game24", {FindingKind::UnfaithfulConclusion}},
    };
    REQUIRE(r.summary.records.size() == 8);
    for (const auto& rec : r.summary.records) {
        CAPTURE(rec.instance_id);
        for (auto k : annotated.at(rec.instance_id))
            CHECK(rec.verdict.has(k));
    }
}
