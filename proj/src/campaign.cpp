#include "tracewise/harness.hpp"

#include "tracewise/error.hpp"
#include "tracewise/rng.hpp"
#include "tracewise/solvers.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace tracewise {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* mode_name(CampaignConfig::Mode m) {
    switch (m) {
    case CampaignConfig::Mode::Synthetic: return "synthetic";
    case CampaignConfig::Mode::Offline: return "offline";
    case CampaignConfig::Mode::Live: return "live";
    }
    return "synthetic";
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (auto i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

using Key = std::tuple<std::string, std::size_t, std::string>;

Key key_of(const ResponseRecord& r) { return {r.instance_id, r.run, r.model}; }

std::vector<ResponseRecord> read_journal(const fs::path& path) {
    std::vector<ResponseRecord> out;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception&) {
            // A crash can leave a partial last line behind.
            harness_logger()->warn("journal line {} unreadable, ignored", lineno);
        }
    }
    return out;
}

void write_lines(const fs::path& path, const std::vector<json>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& j : lines)
        out << j.dump() << "\n";
}

} // namespace

CampaignConfig config_from_json(const json& j) {
    if (!j.is_object())
        fail(ErrorCode::ConfigError, "config must be an object");
    CampaignConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.runs_per_instance = j.value("runs_per_instance", c.runs_per_instance);
        const auto mode = j.value("mode", std::string("synthetic"));
        if (mode == "synthetic")
            c.mode = CampaignConfig::Mode::Synthetic;
        else if (mode == "offline")
            c.mode = CampaignConfig::Mode::Offline;
        else if (mode == "live")
            c.mode = CampaignConfig::Mode::Live;
        else
            fail(ErrorCode::ConfigError, "unknown mode '" + mode + "'");
        if (j.contains("policy"))
            c.policy = parse_policy(j["policy"].get<std::string>());
        c.model_tag = j.value("model_tag", c.model_tag);
        c.responses_path = j.value("responses", c.responses_path);
        c.instances_path = j.value("instances", c.instances_path);
        c.template_dir = j.value("template_dir", c.template_dir);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.workers = j.value("workers", c.workers);
        if (j.contains("tasks")) {
            for (const auto& t : j["tasks"]) {
                TaskSpec spec;
                spec.kind = parse_task_kind(t.at("kind").get<std::string>());
                spec.count = t.value("count", std::size_t{1});
                if (t.contains("size"))
                    for (const auto& [name, v] : t["size"].items()) {
                        if (v.is_array() && v.size() == 2)
                            spec.size[name] = {v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
                        else
                            spec.size[name] = {v.get<std::int64_t>(), v.get<std::int64_t>()};
                        if (spec.size[name].first > spec.size[name].second)
                            fail(ErrorCode::ConfigError, "size range for " + name + " is reversed");
                    }
                c.tasks.push_back(std::move(spec));
            }
        }
        if (j.contains("endpoints"))
            for (const auto& e : j["endpoints"])
                c.endpoints.push_back(endpoint_from_json(e));
        if (j.contains("sampling")) {
            const auto& s = j["sampling"];
            c.sampling.temperature = s.value("temperature", c.sampling.temperature);
            c.sampling.top_p = s.value("top_p", c.sampling.top_p);
            c.sampling.max_tokens = s.value("max_tokens", c.sampling.max_tokens);
        }
        if (j.contains("audit")) {
            const auto& a = j["audit"];
            c.audit.self_loop_run = a.value("self_loop_run", c.audit.self_loop_run);
            c.audit.thinking_block_min = a.value("thinking_block_min", c.audit.thinking_block_min);
            c.audit.thinking_repeats = a.value("thinking_repeats", c.audit.thinking_repeats);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError)
            throw;
        fail(ErrorCode::ConfigError, e.what());
    }
    if (c.runs_per_instance < 1)
        fail(ErrorCode::ConfigError, "runs_per_instance must be at least 1");
    if (c.mode == CampaignConfig::Mode::Offline && c.responses_path.empty())
        fail(ErrorCode::ConfigError, "offline mode needs a responses file");
    if (c.mode == CampaignConfig::Mode::Live && c.endpoints.empty())
        fail(ErrorCode::ConfigError, "live mode needs at least one endpoint");
    return c;
}

json config_to_json(const CampaignConfig& c) {
    json tasks = json::array();
    for (const auto& t : c.tasks) {
        json size = json::object();
        for (const auto& [name, r] : t.size)
            size[name] = r.first == r.second ? json(r.first) : json::array({r.first, r.second});
        tasks.push_back({{"kind", to_string(t.kind)}, {"count", t.count}, {"size", size}});
    }
    json endpoints = json::array();
    for (const auto& e : c.endpoints)
        endpoints.push_back(endpoint_to_json(e));
    return {{"seed", c.seed},
            {"runs_per_instance", c.runs_per_instance},
            {"mode", mode_name(c.mode)},
            {"policy", policy_tag(c.policy)},
            {"model_tag", c.model_tag},
            {"responses", c.responses_path},
            {"instances", c.instances_path},
            {"tasks", tasks},
            {"endpoints", endpoints},
            {"sampling",
             {{"temperature", c.sampling.temperature},
              {"top_p", c.sampling.top_p},
              {"max_tokens", c.sampling.max_tokens}}},
            {"template_dir", c.template_dir},
            {"output_dir", c.output_dir},
            {"workers", c.workers},
            {"audit",
             {{"self_loop_run", c.audit.self_loop_run},
              {"thinking_block_min", c.audit.thinking_block_min},
              {"thinking_repeats", c.audit.thinking_repeats}}}};
}

CampaignConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    CampaignConfig c;
    try {
        c = config_from_json(parse_json_strict(buf.str()));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::IoError)
            throw;
        fail(ErrorCode::ConfigError, path + ": " + e.what());
    }
    // Relative paths in a config file are relative to the file.
    const auto base = fs::path(path).parent_path();
    for (auto* p : {&c.responses_path, &c.instances_path, &c.template_dir, &c.output_dir})
        if (!p->empty() && fs::path(*p).is_relative())
            *p = (base / *p).lexically_normal().string();
    return c;
}

std::vector<TaskInstance> campaign_instances(const CampaignConfig& config) {
    std::vector<TaskInstance> out;
    if (!config.instances_path.empty()) {
        std::ifstream in(config.instances_path, std::ios::binary);
        if (!in)
            fail(ErrorCode::IoError, "cannot open " + config.instances_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            try {
                out.push_back(instance_from_json(parse_json_strict(line)));
            } catch (const Error& e) {
                fail(ErrorCode::FormatError, config.instances_path + " line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return out;
    }
    for (std::size_t t = 0; t < config.tasks.size(); ++t) {
        const auto& spec = config.tasks[t];
        for (std::size_t i = 0; i < spec.count; ++i) {
            SizeParams size;
            for (const auto& [name, r] : spec.size)
                size[name] = r.first + static_cast<std::int64_t>(i % static_cast<std::size_t>(r.second - r.first + 1));
            const auto seed = derive_seed(derive_seed(config.seed, t), i);
            out.push_back(generate_instance(spec.kind, size, seed));
        }
    }
    return out;
}

VerdictRecord audit_record(const TaskInstance& instance, const ReferenceSolution& reference,
                           const ResponseRecord& response, const AuditOptions& options) {
    auto block = extract_answer_block(response.raw);
    auto opts = options;
    opts.had_tags = block.had_tags;
    auto trace = parse_trace(instance.kind, block.payload);
    VerdictRecord v;
    v.instance_id = instance.instance_id;
    v.kind = instance.kind;
    v.model = response.model;
    v.run = response.run;
    v.size_bucket = size_bucket(instance);
    v.truncated = trace.truncated;
    v.verdict = audit_trace(instance, reference, trace, response.thinking, opts);
    if (instance.kind == TaskKind::PermutationWithDuplicates)
        v.coverage = solution_coverage_ratio(instance, trace, response.model).coverage;
    return v;
}

CampaignResult run_campaign(const CampaignConfig& config) {
    auto log = harness_logger();
    const fs::path out_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        fail(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

    CampaignResult result;
    const auto instances = campaign_instances(config);
    result.instances = instances.size();
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < instances.size(); ++i)
        by_id.emplace(instances[i].instance_id, i);

    {
        std::ofstream cfg(out_dir / "config.json", std::ios::binary | std::ios::trunc);
        cfg << config_to_json(config).dump(2) << "\n";
        std::vector<json> lines;
        for (const auto& inst : instances)
            lines.push_back(instance_to_json(inst));
        write_lines(out_dir / "instances.jsonl", lines);
    }

    std::vector<ReferenceSolution> references(instances.size());
    parallel_for(instances.size(), config.workers,
                 [&](std::size_t i) { references[i] = reference_for_audit(instances[i]); });

    // Responses: journal first, then whatever is still missing.
    const auto journal_path = out_dir / "journal.jsonl";
    std::map<Key, ResponseRecord> responses;
    for (auto& r : read_journal(journal_path))
        if (by_id.count(r.instance_id))
            responses.emplace(key_of(r), std::move(r));
    result.resumed = responses.size();

    std::mutex journal_mutex;
    std::ofstream journal(journal_path, std::ios::binary | std::ios::app);
    if (!journal)
        fail(ErrorCode::IoError, "cannot append to " + journal_path.string());
    auto journal_append = [&](const ResponseRecord& r) {
        std::lock_guard lock(journal_mutex);
        journal << record_to_json(r).dump() << "\n";
        journal.flush();
        responses.emplace(key_of(r), r);
    };

    if (config.mode == CampaignConfig::Mode::Synthetic) {
        const auto model = config.model_tag.empty() ? policy_tag(config.policy) : config.model_tag;
        struct Job {
            std::size_t inst, run;
        };
        std::vector<Job> jobs;
        for (std::size_t i = 0; i < instances.size(); ++i)
            for (std::size_t r = 0; r < config.runs_per_instance; ++r)
                if (!responses.count({instances[i].instance_id, r, model}))
                    jobs.push_back({i, r});
        std::vector<std::optional<ResponseRecord>> made(jobs.size());
        parallel_for(jobs.size(), config.workers, [&](std::size_t k) {
            const auto& inst = instances[jobs[k].inst];
            try {
                auto rec = synthetic_agent_respond(inst, config.policy,
                                                   derive_seed(inst.seed ^ fnv1a64(inst.instance_id), jobs[k].run));
                rec.run = jobs[k].run;
                rec.model = model;
                made[k] = std::move(rec);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::InapplicablePolicy)
                    throw;
                if (jobs[k].run == 0)
                    log->warn("{}: {}", inst.instance_id, e.what());
            }
        });
        for (auto& m : made)
            if (m)
                journal_append(*m);
    } else if (config.mode == CampaignConfig::Mode::Offline) {
        for (auto& r : ingest_responses(config.responses_path)) {
            if (!by_id.count(r.instance_id)) {
                log->warn("response for unknown instance {} ignored", r.instance_id);
                continue;
            }
            if (!responses.count(key_of(r)))
                journal_append(r);
        }
    } else {
        struct Job {
            std::size_t inst, run, endpoint;
        };
        std::vector<Job> jobs;
        for (std::size_t e = 0; e < config.endpoints.size(); ++e)
            for (std::size_t i = 0; i < instances.size(); ++i)
                for (std::size_t r = 0; r < config.runs_per_instance; ++r)
                    if (!responses.count({instances[i].instance_id, r, config.endpoints[e].model}))
                        jobs.push_back({i, r, e});
        std::vector<std::string> prompts(instances.size());
        for (std::size_t i = 0; i < instances.size(); ++i)
            prompts[i] = build_prompt(instances[i], config.template_dir);
        std::atomic<std::size_t> calls{0}, failures{0};
        std::size_t lanes = 0;
        for (const auto& e : config.endpoints)
            lanes += std::max<std::size_t>(1, e.max_concurrency);
        parallel_for(jobs.size(), static_cast<unsigned>(lanes), [&](std::size_t k) {
            const auto& job = jobs[k];
            const auto& endpoint = config.endpoints[job.endpoint];
            ++calls;
            try {
                auto rec = fetch_completion(endpoint, prompts[job.inst], config.sampling);
                rec.instance_id = instances[job.inst].instance_id;
                rec.run = job.run;
                rec.model = endpoint.model;
                journal_append(rec);
            } catch (const Error& e) {
                ++failures;
                log->error("{} run {} on {}: {}", instances[job.inst].instance_id, job.run, endpoint.model,
                           e.what());
                if (e.code() == ErrorCode::AuthError)
                    throw;
            }
        });
        result.endpoint_calls = calls;
        if (failures)
            log->warn("{} endpoint calls failed; rerun the campaign to retry them", failures.load());
    }
    journal.close();

    std::vector<const ResponseRecord*> ordered;
    for (const auto& [key, r] : responses)
        ordered.push_back(&r);
    result.responses = ordered.size();
    std::vector<VerdictRecord> verdicts(ordered.size());
    parallel_for(ordered.size(), config.workers, [&](std::size_t k) {
        const auto idx = by_id.at(ordered[k]->instance_id);
        verdicts[k] = audit_record(instances[idx], references[idx], *ordered[k], config.audit);
    });
    result.summary = verdicts.empty() ? CampaignSummary{} : aggregate_campaign(std::move(verdicts));
    result.files = {"config.json", "instances.jsonl", "journal.jsonl"};
    for (auto& f : emit_reports(result.summary, out_dir.string()))
        result.files.push_back(f);
    log->info("campaign: {} instances, {} responses ({} resumed), reports in {}", result.instances,
              result.responses, result.resumed, out_dir.string());
    return result;
}

} // namespace tracewise
