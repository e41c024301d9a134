#pragma once

#include "tracewise/audit.hpp"
#include "tracewise/instance.hpp"
#include "tracewise/trace.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tracewise {

struct CoveragePoint {
    std::string instance_id;
    std::uint64_t solution_space_size = 0;
    std::size_t reached = 0;
    double coverage = 0.0;
    std::string model;
};

// Distinct CHECK(path)==done directives naming a unique permutation of the
// multiset, over the number of unique permutations. Throws WrongKind.
CoveragePoint solution_coverage_ratio(const TaskInstance& instance, const ParsedTrace& trace,
                                      const std::string& model = "");

// One audited response.
struct VerdictRecord {
    std::string instance_id;
    TaskKind kind = TaskKind::CountingElements;
    std::string model;
    std::size_t run = 0;
    std::uint64_t size_bucket = 0;
    AuditVerdict verdict;
    std::optional<double> coverage; // permutations only
    bool truncated = false;
};

struct GroupStats {
    std::string model;
    TaskKind kind = TaskKind::CountingElements;
    std::uint64_t size_bucket = 0;
    std::size_t runs = 0;
    std::optional<double> mean_coverage;
    std::optional<double> std_coverage; // sample standard deviation, 0 for one run
    std::map<FindingKind, std::size_t> finding_counts;
    std::size_t findings_total = 0;
    double accuracy = 0.0;
    double incomplete_rate = 0.0;
    double effective_rate = 0.0;
};

struct CampaignSummary {
    std::vector<GroupStats> groups; // ordered by (model, kind, size_bucket)
    std::vector<VerdictRecord> records; // ordered by (model, kind, instance_id, run)
};

// Throws EmptyInput.
CampaignSummary aggregate_campaign(std::vector<VerdictRecord> verdicts);

nlohmann::json summary_to_json(const CampaignSummary& summary);

// One verdicts.jsonl line back into a record. Throws FormatError.
VerdictRecord verdict_record_from_json(const nlohmann::json& j);
// Reads verdicts.jsonl. Throws IoError or FormatError naming the line.
std::vector<VerdictRecord> load_verdicts(const std::string& path);

// summary.json, verdicts.jsonl and curve.csv (model,solution_space_size,
// mean_coverage,std) under out_dir. Throws IoError.
std::vector<std::string> emit_reports(const CampaignSummary& summary, const std::string& out_dir);

} // namespace tracewise
