#include <doctest.h>

#include "tracewise/audit.hpp"
#include "tracewise/metrics.hpp"

#include <fstream>
#include <iostream>
#include <string>

using namespace tracewise;

namespace {

FixtureResult load(const std::string& name) {
    return audit_fixture_file(std::string(TRACEWISE_FIXTURE_DIR) + "/" + name + ".json");
}

void dump(const FixtureResult& r) {
    std::cerr << verdict_to_json(r.verdict, r.id, r.model).dump() << "\n";
}

} // namespace

TEST_CASE("counting transcript: boundary, execution, omission and a wrong count") {
    auto r = load("d1_counting");
    CHECK(r.annotated_present);
    CHECK(r.verdict.has(FindingKind::BoundaryViolation));
    CHECK(r.verdict.has(FindingKind::WrongAnswer));
    CHECK_FALSE(r.verdict.final_answer_correct);
    if (!r.annotated_present)
        dump(r);
}

TEST_CASE("sliding window transcript drops the last window") {
    auto r = load("d2_sliding");
    CHECK(r.annotated_present);
    CHECK(r.verdict.has(FindingKind::ProcedureOmission));
    CHECK(r.verdict.has(FindingKind::WrongAnswer));
    if (!r.annotated_present)
        dump(r);
}

TEST_CASE("permutation transcript backtracks past an unexplored branch") {
    auto r = load("d3_permutation");
    CHECK(r.annotated_present);
    REQUIRE(r.verdict.coverage.has_value());
    CHECK(*r.verdict.coverage == doctest::Approx(2.0 / 9.0));
    if (!r.annotated_present)
        dump(r);
}

TEST_CASE("24 transcript revisits equivalent expressions") {
    auto r = load("d4_game24");
    CHECK(r.annotated_present);
    CHECK(r.verdict.final_answer_correct);
    if (!r.annotated_present)
        dump(r);
}

TEST_CASE("24 transcript loops until the budget runs out") {
    auto r = load("d5_game24");
    CHECK(r.annotated_present);
    CHECK(r.verdict.has(FindingKind::InfiniteSelfLoop));
    CHECK(r.verdict.has(FindingKind::Incomplete));
    if (!r.annotated_present)
        dump(r);
}

TEST_CASE("clustering transcript keeps a stale cluster yet ends correct") {
    auto r = load("d6_clustering");
    CHECK(r.annotated_present);
    CHECK_FALSE(r.verdict.has(FindingKind::WrongAnswer));
    if (!r.annotated_present)
        dump(r);
}

TEST_CASE("factorization transcript misjudges divisibility by 3") {
    auto r = load("d7_factorization");
    CHECK(r.annotated_present);
    CHECK(r.verdict.has(FindingKind::WrongAnswer));
    if (!r.annotated_present)
        dump(r);
}

TEST_CASE("24 transcript concludes with attempts never tried") {
    auto r = load("d8_game24");
    CHECK(r.annotated_present);
    CHECK(r.verdict.count(FindingKind::UnfaithfulConclusion) == 2);
    CHECK(r.verdict.final_answer_correct);
    if (!r.annotated_present)
        dump(r);

    SUBCASE("without the thinking channel the conclusion cannot be checked") {
        auto j = nlohmann::json::parse(std::ifstream(std::string(TRACEWISE_FIXTURE_DIR) + "/d8_game24.json"));
        j.erase("thinking");
        auto bare = audit_fixture(j);
        CHECK_FALSE(bare.verdict.has(FindingKind::UnfaithfulConclusion));
    }
}
