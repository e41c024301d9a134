#include <CLI11.hpp>

#include "tracewise/audit.hpp"
#include "tracewise/error.hpp"
#include "tracewise/harness.hpp"
#include "tracewise/metrics.hpp"
#include "tracewise/solvers.hpp"
#include "tracewise/trace.hpp"
#include "tracewise/wanderer.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

using namespace tracewise;
using nlohmann::json;

namespace {

std::string read_all(const std::string& path) {
    if (path == "-") {
        std::ostringstream s;
        s << std::cin.rdbuf();
        return s.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// A file holding one JSON instance, or JSON Lines of them.
std::vector<TaskInstance> read_instances(const std::string& path) {
    const auto text = read_all(path);
    std::vector<TaskInstance> out;
    try {
        auto j = json::parse(text);
        out.push_back(instance_from_json(j));
        return out;
    } catch (const json::exception&) {
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(instance_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            fail(ErrorCode::FormatError, path + " line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

SizeParams parse_sizes(const std::vector<std::string>& items) {
    SizeParams size;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::ConfigError, "size must be name=value: '" + item + "'");
        try {
            size[item.substr(0, eq)] = std::stoll(item.substr(eq + 1));
        } catch (const std::exception&) {
            fail(ErrorCode::ConfigError, "size value is not an integer: '" + item + "'");
        }
    }
    return size;
}

std::ostream* open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-")
        return &std::cout;
    file.open(path, std::ios::binary);
    if (!file)
        fail(ErrorCode::IoError, "cannot write " + path);
    return &file;
}

json diagnostics_json(const ParsedTrace& t) {
    json out = json::array();
    for (const auto& d : t.diagnostics)
        out.push_back({{"severity", d.severity == Severity::Fatal ? "fatal" : "warning"},
                       {"message", d.message},
                       {"span", {d.span.begin, d.span.end}}});
    return out;
}

// Shortest text that reads back to the same double.
std::string csv_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate reasoning tasks, audit search traces and run evaluation campaigns."};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate task instances as JSON Lines");
    std::string gen_kind, gen_out;
    std::uint64_t gen_seed = 0;
    std::size_t gen_count = 1;
    std::vector<std::string> gen_size;
    gen->add_option("--kind", gen_kind, "Task kind")->required();
    gen->add_option("--seed", gen_seed, "First seed; instance i uses seed + i");
    gen->add_option("--count", gen_count, "Number of instances");
    gen->add_option("--size", gen_size, "Size parameter name=value, repeatable");
    gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

    // solve
    auto* solve = app.add_subcommand("solve", "Print the canonical trace and answer of instances");
    std::string solve_in;
    bool solve_oracle = false, solve_prompt = false, solve_json = false;
    solve->add_option("instances", solve_in, "Instance JSON or JSON Lines file, - for stdin")->required();
    solve->add_flag("--oracle", solve_oracle, "Also run the brute force oracle");
    solve->add_flag("--prompt", solve_prompt, "Print the prompt instead of the trace");
    solve->add_flag("--json", solve_json, "One JSON object per instance");

    // parse
    auto* parse = app.add_subcommand("parse", "Parse a response into directives");
    std::string parse_kind, parse_in = "-";
    parse->add_option("--kind", parse_kind, "Task kind")->required();
    parse->add_option("response", parse_in, "Response text file, - for stdin");

    // audit
    auto* audit = app.add_subcommand("audit", "Audit a response against its instance");
    std::string audit_instance, audit_response_path, audit_thinking, audit_model = "cli";
    std::vector<std::string> audit_fixtures;
    audit->add_option("--instance", audit_instance, "Instance JSON file");
    audit->add_option("--response", audit_response_path, "Raw response text file");
    audit->add_option("--thinking", audit_thinking, "Thinking text file");
    audit->add_option("--model", audit_model, "Model tag for the verdict");
    audit->add_option("--fixture", audit_fixtures, "Fixture JSON file, repeatable");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo wanderer success rates as CSV");
    std::string sim_model = "independent-path", sim_out;
    std::vector<int> sim_d{2, 5, 10, 15};
    std::vector<std::uint64_t> sim_m{1, 2, 4};
    std::vector<double> sim_q{0.9, 0.95, 0.99};
    std::uint64_t sim_trials = 200000, sim_seed = 0, sim_budget = std::numeric_limits<std::uint64_t>::max();
    unsigned sim_workers = 0;
    sim->add_option("--model", sim_model, "independent-path or shared-tree")
        ->check(CLI::IsMember({"independent-path", "shared-tree"}));
    sim->add_option("--d", sim_d, "Depths")->delimiter(',');
    sim->add_option("--m", sim_m, "Target counts")->delimiter(',');
    sim->add_option("--q", sim_q, "Per-decision retention q_w")->delimiter(',');
    sim->add_option("--trials", sim_trials, "Trials per point");
    sim->add_option("--seed", sim_seed, "Seed");
    sim->add_option("--budget", sim_budget, "Node visit budget (shared-tree)");
    sim->add_option("--workers", sim_workers, "Threads (independent-path; 0 = all cores)");
    sim->add_option("-o,--output", sim_out, "Output file (default stdout)");

    // report
    auto* report = app.add_subcommand("report", "Rebuild reports from a verdicts.jsonl file");
    std::string report_in, report_out = "report_out";
    report->add_option("verdicts", report_in, "verdicts.jsonl")->required();
    report->add_option("-o,--output-dir", report_out, "Output directory");

    // campaign
    auto* camp = app.add_subcommand("campaign", "Run a campaign from a JSON config");
    std::string camp_config, camp_out, camp_policy;
    int camp_workers = -1;
    camp->add_option("config", camp_config, "Campaign config file")->required();
    camp->add_option("-o,--output-dir", camp_out, "Override the output directory");
    camp->add_option("--policy", camp_policy, "Override the synthetic agent policy");
    camp->add_option("--workers", camp_workers, "Override the worker count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto kind = parse_task_kind(gen_kind);
            const auto size = parse_sizes(gen_size);
            std::ofstream file;
            auto* out = open_out(gen_out, file);
            for (std::size_t i = 0; i < gen_count; ++i)
                *out << instance_to_json(generate_instance(kind, size, gen_seed + i)).dump() << "\n";
        } else if (*solve) {
            for (const auto& inst : read_instances(solve_in)) {
                if (solve_prompt) {
                    std::cout << build_prompt(inst) << "\n";
                    continue;
                }
                auto ref = canonical_trace(inst);
                if (solve_json) {
                    json j{{"instance_id", inst.instance_id},
                           {"answer", answer_to_json(ref.final_answer)},
                           {"trace", ref.canonical_trace},
                           {"solver", ref.solver_name}};
                    if (solve_oracle) {
                        auto o = brute_force_oracle(inst);
                        j["oracle"] = answer_to_json(o);
                        j["agree"] = answers_equal(inst, o, ref.final_answer);
                    }
                    std::cout << j.dump() << "\n";
                } else {
                    std::cout << "# " << inst.instance_id << "\n" << ref.canonical_trace;
                    if (solve_oracle)
                        std::cout << "# oracle "
                                  << (answers_equal(inst, brute_force_oracle(inst), ref.final_answer) ? "agrees"
                                                                                                      : "DISAGREES")
                                  << "\n";
                }
            }
        } else if (*parse) {
            const auto kind = parse_task_kind(parse_kind);
            const auto block = extract_answer_block(read_all(parse_in));
            const auto t = parse_trace(kind, block.payload);
            json dirs = json::array();
            for (const auto& d : t.directives)
                dirs.push_back({{"text", serialize_directive(d)}, {"span", {d.span.begin, d.span.end}}});
            std::cout << json{{"kind", to_string(kind)},
                              {"had_tags", block.had_tags},
                              {"truncated", t.truncated},
                              {"directives", dirs},
                              {"diagnostics", diagnostics_json(t)}}
                             .dump(2)
                      << "\n";
        } else if (*audit) {
            if (!audit_fixtures.empty()) {
                for (const auto& f : audit_fixtures) {
                    auto r = audit_fixture_file(f);
                    auto j = verdict_to_json(r.verdict, r.id, r.model);
                    json ann = json::array();
                    for (auto k : r.annotated)
                        ann.push_back(to_string(k));
                    j["annotated"] = ann;
                    j["annotated_present"] = r.annotated_present;
                    std::cout << j.dump() << "\n";
                }
            } else {
                if (audit_instance.empty() || audit_response_path.empty())
                    fail(ErrorCode::ConfigError, "audit needs --instance and --response, or --fixture");
                auto insts = read_instances(audit_instance);
                if (insts.size() != 1)
                    fail(ErrorCode::ConfigError, "audit takes exactly one instance");
                const auto& inst = insts[0];
                std::optional<std::string> thinking;
                if (!audit_thinking.empty())
                    thinking = read_all(audit_thinking);
                auto v = audit_response(inst, reference_for_audit(inst), read_all(audit_response_path), thinking);
                std::cout << verdict_to_json(v, inst.instance_id, audit_model).dump(2) << "\n";
            }
        } else if (*sim) {
            std::ofstream file;
            auto* out = open_out(sim_out, file);
            *out << "model,d,m,q_w,trials,estimate,std_error,closed_form\n";
            for (int d : sim_d)
                for (auto m : sim_m)
                    for (double q : sim_q) {
                        SuccessEstimate e;
                        if (sim_model == "independent-path") {
                            e = simulate_independent({d, m, q, sim_trials, sim_seed}, sim_workers);
                        } else {
                            e = simulate_tree(d, m, 1.0 - q, sim_budget, sim_trials, sim_seed);
                        }
                        *out << to_string(e.model) << "," << d << "," << m << "," << csv_number(q) << ","
                             << e.trials << "," << csv_number(e.estimate) << "," << csv_number(e.std_error) << ","
                             << csv_number(success_probability(d, m, q)) << "\n";
                    }
        } else if (*report) {
            auto files = emit_reports(aggregate_campaign(load_verdicts(report_in)), report_out);
            for (const auto& f : files)
                std::cout << report_out << "/" << f << "\n";
        } else if (*camp) {
            auto c = load_config(camp_config);
            if (!camp_out.empty())
                c.output_dir = camp_out;
            if (!camp_policy.empty())
                c.policy = parse_policy(camp_policy);
            if (camp_workers >= 0)
                c.workers = static_cast<unsigned>(camp_workers);
            auto r = run_campaign(c);
            std::cout << json{{"output_dir", c.output_dir},
                              {"instances", r.instances},
                              {"responses", r.responses},
                              {"resumed", r.resumed},
                              {"endpoint_calls", r.endpoint_calls},
                              {"groups", r.summary.groups.size()}}
                             .dump()
                      << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "tracewise: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
