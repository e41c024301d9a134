#include <doctest.h>

#include "tracewise/audit.hpp"
#include "tracewise/error.hpp"

#include <set>

using namespace tracewise;

namespace {

std::set<FindingKind> taxonomy_kinds(const AuditVerdict& v) {
    std::set<FindingKind> out;
    for (const auto& f : v.findings)
        if (is_taxonomy_kind(f.kind))
            out.insert(f.kind);
    return out;
}

std::string describe(const AuditVerdict& v) {
    std::string s;
    for (const auto& f : v.findings)
        s += finding_to_json(f).dump() + "\n";
    return s;
}

} // namespace

TEST_CASE("canonical traces audit clean") {
    for (auto kind : kAllTaskKinds) {
        for (std::uint64_t seed = 1; seed <= 25; ++seed) {
            auto inst = generate_instance(kind, {}, seed);
            auto ref = canonical_trace(inst);
            auto trace = parse_trace(kind, ref.canonical_trace);
            auto v = audit_trace(inst, ref, trace);
            INFO(inst.instance_id << "\n" << describe(v));
            CHECK(v.findings.empty());
            CHECK(v.final_answer_correct);
            CHECK(v.effective);
            CHECK(v.steps_valid == v.steps_total);
        }
    }
}

TEST_CASE("each corruption yields exactly its finding kind") {
    for (auto kind : kAllTaskKinds) {
        for (auto fk : kTaxonomyKinds) {
            for (std::uint64_t seed = 1; seed <= 25; ++seed) {
                auto inst = generate_instance(kind, {}, seed);
                auto ref = canonical_trace(inst);
                if (!corruption_applicable(inst, ref, fk))
                    continue;
                auto c = corrupt_trace(inst, ref, fk, seed);
                auto v = audit_trace(inst, ref, parse_trace(kind, c.text));
                INFO(inst.instance_id << " " << to_string(fk) << "\n" << c.text << "\n" << describe(v));
                CHECK(taxonomy_kinds(v) == std::set<FindingKind>{fk});
                bool at_expected = false;
                for (const auto& f : v.findings)
                    at_expected |= f.kind == fk && f.directive_index == c.expected.directive_index;
                CHECK(at_expected);
            }
        }
    }
}

TEST_CASE("non-taxonomy kinds are not corruptions") {
    auto inst = generate_instance(TaskKind::CountingElements, {}, 1);
    auto ref = canonical_trace(inst);
    CHECK_THROWS_AS(corrupt_trace(inst, ref, FindingKind::WrongAnswer, 1), Error);
    CHECK_FALSE(corruption_applicable(inst, ref, FindingKind::IncorrectBacktracking));
}
