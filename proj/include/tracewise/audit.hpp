#pragma once

#include "tracewise/instance.hpp"
#include "tracewise/solvers.hpp"
#include "tracewise/trace.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tracewise {

enum class FindingKind {
    BoundaryViolation,
    ProcedureOmission,
    IncorrectBacktracking,
    StateRevisitation,
    InfiniteSelfLoop,
    StateStaleness,
    ExecutionError,
    UnfaithfulConclusion,
    WrongAnswer,
    Incomplete,
};

inline constexpr std::array<FindingKind, 8> kTaxonomyKinds = {
    FindingKind::BoundaryViolation,   FindingKind::ProcedureOmission,
    FindingKind::IncorrectBacktracking, FindingKind::StateRevisitation,
    FindingKind::InfiniteSelfLoop,    FindingKind::StateStaleness,
    FindingKind::ExecutionError,      FindingKind::UnfaithfulConclusion,
};

std::string_view to_string(FindingKind kind);
FindingKind parse_finding_kind(std::string_view text);
bool is_taxonomy_kind(FindingKind kind);

// Where a finding's span points: the answer payload, the thinking text, or
// the raw response.
enum class Channel { Answer, Thinking, Raw };

struct Finding {
    FindingKind kind = FindingKind::ExecutionError;
    std::optional<std::size_t> directive_index;
    std::optional<std::size_t> related_index; // earlier directive it conflicts with
    std::optional<Span> span;
    Channel channel = Channel::Answer;
    std::optional<std::string> expected;
    std::optional<std::string> observed;
    std::string note;
};

struct AuditVerdict {
    std::vector<Finding> findings;
    bool effective = false;
    bool final_answer_correct = false;
    std::optional<double> coverage;
    std::size_t goals_reached = 0; // permutations: distinct valid done paths
    std::size_t goals_total = 0;
    std::size_t steps_total = 0;
    std::size_t steps_valid = 0;
    std::size_t parse_warnings = 0;
    std::size_t parse_fatals = 0;

    bool has(FindingKind kind) const;
    std::size_t count(FindingKind kind) const;
};

struct AuditOptions {
    std::size_t self_loop_run = 3;       // identical consecutive directives
    std::size_t thinking_block_min = 40; // characters
    std::size_t thinking_repeats = 10;
    bool had_tags = true;
};

AuditVerdict audit_trace(const TaskInstance& instance, const ReferenceSolution& reference,
                         const ParsedTrace& trace, const std::optional<std::string>& thinking = std::nullopt,
                         const AuditOptions& options = {});

// extract_answer_block + parse_trace + audit_trace.
AuditVerdict audit_response(const TaskInstance& instance, const ReferenceSolution& reference,
                            const std::string& raw, const std::optional<std::string>& thinking = std::nullopt,
                            AuditOptions options = {});

// Reference for instances without a canonical trace (unsolvable Game24).
ReferenceSolution reference_for_audit(const TaskInstance& instance);

nlohmann::json finding_to_json(const Finding& f);
nlohmann::json verdict_to_json(const AuditVerdict& v, const std::string& instance_id,
                               const std::string& model);

struct Corruption {
    std::vector<Directive> directives;
    std::string text;
    Finding expected;
};

// One minimal mutation of the canonical trace that exhibits exactly the
// requested failure. Throws InapplicableCorruption.
Corruption corrupt_trace(const TaskInstance& instance, const ReferenceSolution& reference,
                         FindingKind kind, std::uint64_t seed);

// Whether corrupt_trace supports the kind for this instance.
bool corruption_applicable(const TaskInstance& instance, const ReferenceSolution& reference,
                           FindingKind kind);

struct FixtureResult {
    std::string id;
    std::string model;
    TaskInstance instance;
    AuditVerdict verdict;
    std::vector<FindingKind> annotated;
    bool annotated_present = false;
};

// Fixture JSON: {id, kind, payload, raw, thinking?, annotated: [kinds], model?}.
FixtureResult audit_fixture(const nlohmann::json& fixture);
FixtureResult audit_fixture_file(const std::string& path);

} // namespace tracewise
