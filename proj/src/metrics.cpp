#include "tracewise/metrics.hpp"

#include "tracewise/error.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace tracewise {

using nlohmann::json;
namespace fs = std::filesystem;

CoveragePoint solution_coverage_ratio(const TaskInstance& instance, const ParsedTrace& trace,
                                      const std::string& model) {
    if (instance.kind != TaskKind::PermutationWithDuplicates)
        fail(ErrorCode::WrongKind, "coverage is defined for permutation instances");
    auto sorted = instance.as<PermutationPayload>().elements;
    std::sort(sorted.begin(), sorted.end());
    std::set<std::vector<int>> reached;
    for (const auto& d : trace.directives) {
        if (d.type != DirectiveType::Check || !d.result || d.result->text != "done" || d.args.empty())
            continue;
        std::vector<int> path;
        try {
            for (auto v : d.args[0].as_int_list())
                path.push_back(static_cast<int>(v));
        } catch (const Error&) {
            continue;
        }
        auto check = path;
        std::sort(check.begin(), check.end());
        if (check == sorted)
            reached.insert(path);
    }
    CoveragePoint p;
    p.instance_id = instance.instance_id;
    p.solution_space_size = multinomial_count(sorted);
    p.reached = reached.size();
    p.coverage = static_cast<double>(reached.size()) / static_cast<double>(p.solution_space_size);
    p.model = model;
    return p;
}

CampaignSummary aggregate_campaign(std::vector<VerdictRecord> verdicts) {
    if (verdicts.empty())
        fail(ErrorCode::EmptyInput, "no verdicts to aggregate");
    std::sort(verdicts.begin(), verdicts.end(), [](const VerdictRecord& a, const VerdictRecord& b) {
        return std::tie(a.model, a.kind, a.instance_id, a.run) < std::tie(b.model, b.kind, b.instance_id, b.run);
    });
    std::map<std::tuple<std::string, TaskKind, std::uint64_t>, std::vector<const VerdictRecord*>> groups;
    for (const auto& v : verdicts)
        groups[{v.model, v.kind, v.size_bucket}].push_back(&v);
    CampaignSummary s;
    for (const auto& [key, members] : groups) {
        GroupStats g;
        std::tie(g.model, g.kind, g.size_bucket) = key;
        g.runs = members.size();
        std::vector<double> cov;
        std::size_t correct = 0, incomplete = 0, effective = 0;
        for (const auto* r : members) {
            for (const auto& f : r->verdict.findings) {
                ++g.finding_counts[f.kind];
                ++g.findings_total;
            }
            correct += r->verdict.final_answer_correct;
            incomplete += r->truncated;
            effective += r->verdict.effective;
            if (r->coverage)
                cov.push_back(*r->coverage);
        }
        const auto n = static_cast<double>(g.runs);
        g.accuracy = static_cast<double>(correct) / n;
        g.incomplete_rate = static_cast<double>(incomplete) / n;
        g.effective_rate = static_cast<double>(effective) / n;
        if (!cov.empty()) {
            double mean = 0.0;
            for (double c : cov)
                mean += c;
            mean /= static_cast<double>(cov.size());
            double ss = 0.0;
            for (double c : cov)
                ss += (c - mean) * (c - mean);
            g.mean_coverage = mean;
            g.std_coverage = cov.size() > 1 ? std::sqrt(ss / static_cast<double>(cov.size() - 1)) : 0.0;
        }
        s.groups.push_back(std::move(g));
    }
    s.records = std::move(verdicts);
    return s;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json group_to_json(const GroupStats& g) {
    json counts = json::object();
    for (auto k : kTaxonomyKinds)
        counts[std::string(to_string(k))] = 0;
    counts["WrongAnswer"] = 0;
    counts["Incomplete"] = 0;
    for (const auto& [k, c] : g.finding_counts)
        counts[std::string(to_string(k))] = c;
    return {{"model", g.model},
            {"kind", to_string(g.kind)},
            {"size_bucket", g.size_bucket},
            {"runs", g.runs},
            {"mean_coverage", opt(g.mean_coverage)},
            {"std_coverage", opt(g.std_coverage)},
            {"finding_counts", counts},
            {"findings_total", g.findings_total},
            {"accuracy", g.accuracy},
            {"incomplete_rate", g.incomplete_rate},
            {"effective_rate", g.effective_rate}};
}

// Shortest text that reads back to the same double.
std::string number(double v) { return json(v).dump(); }

} // namespace

json summary_to_json(const CampaignSummary& summary) {
    json groups = json::array();
    for (const auto& g : summary.groups)
        groups.push_back(group_to_json(g));
    return {{"groups", groups}, {"verdicts", summary.records.size()}};
}

std::vector<std::string> emit_reports(const CampaignSummary& summary, const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        fail(ErrorCode::IoError, "cannot create " + out_dir + ": " + ec.message());
    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorCode::IoError, "cannot write " + (fs::path(out_dir) / name).string());
        return out;
    };
    std::vector<std::string> written;
    {
        auto out = open("summary.json");
        out << summary_to_json(summary).dump(2) << "\n";
        written.push_back("summary.json");
    }
    {
        auto out = open("verdicts.jsonl");
        for (const auto& r : summary.records) {
            auto j = verdict_to_json(r.verdict, r.instance_id, r.model);
            j["kind"] = to_string(r.kind);
            j["run"] = r.run;
            j["size_bucket"] = r.size_bucket;
            j["truncated"] = r.truncated;
            if (r.coverage)
                j["coverage"] = *r.coverage;
            out << j.dump() << "\n";
        }
        written.push_back("verdicts.jsonl");
    }
    {
        std::vector<const GroupStats*> rows;
        for (const auto& g : summary.groups)
            if (g.mean_coverage)
                rows.push_back(&g);
        std::stable_sort(rows.begin(), rows.end(), [](const GroupStats* a, const GroupStats* b) {
            return std::tie(a->size_bucket, a->model) < std::tie(b->size_bucket, b->model);
        });
        auto out = open("curve.csv");
        out << "model,solution_space_size,mean_coverage,std\n";
        for (const auto* g : rows)
            out << g->model << "," << g->size_bucket << "," << number(*g->mean_coverage) << ","
                << number(*g->std_coverage) << "\n";
        written.push_back("curve.csv");
    }
    return written;
}

namespace {

template <class T>
std::optional<T> opt(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    return j[key].get<T>();
}

} // namespace

VerdictRecord verdict_record_from_json(const json& j) {
    VerdictRecord r;
    try {
        r.instance_id = j.at("instance_id").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.kind = parse_task_kind(j.at("kind").get<std::string>());
        r.run = j.at("run").get<std::size_t>();
        r.size_bucket = j.at("size_bucket").get<std::uint64_t>();
        r.truncated = j.value("truncated", false);
        r.coverage = opt<double>(j, "coverage");
        auto& v = r.verdict;
        v.effective = j.at("effective").get<bool>();
        v.final_answer_correct = j.at("final_answer_correct").get<bool>();
        v.coverage = r.coverage;
        const auto& c = j.at("counts");
        v.steps_total = c.at("steps_total").get<std::size_t>();
        v.steps_valid = c.at("steps_valid").get<std::size_t>();
        v.goals_reached = c.at("goals_reached").get<std::size_t>();
        v.goals_total = c.at("goals_total").get<std::size_t>();
        v.parse_warnings = c.at("parse_warnings").get<std::size_t>();
        v.parse_fatals = c.at("parse_fatals").get<std::size_t>();
        for (const auto& fj : j.at("findings")) {
            Finding f;
            f.kind = parse_finding_kind(fj.at("kind").get<std::string>());
            f.directive_index = opt<std::size_t>(fj, "directive_index");
            f.related_index = opt<std::size_t>(fj, "related_index");
            if (fj.contains("span") && fj["span"].is_array())
                f.span = Span{fj["span"].at(0).get<std::size_t>(), fj["span"].at(1).get<std::size_t>()};
            const auto ch = fj.value("channel", std::string("answer"));
            f.channel = ch == "thinking" ? Channel::Thinking : ch == "raw" ? Channel::Raw : Channel::Answer;
            f.expected = opt<std::string>(fj, "expected");
            f.observed = opt<std::string>(fj, "observed");
            f.note = fj.value("note", std::string());
            v.findings.push_back(std::move(f));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, e.what());
    } catch (const Error& e) {
        fail(ErrorCode::FormatError, e.what());
    }
    return r;
}

std::vector<VerdictRecord> load_verdicts(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoError, "cannot open " + path);
    std::vector<VerdictRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(verdict_record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            fail(ErrorCode::FormatError, path + " line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            fail(ErrorCode::FormatError, path + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace tracewise
