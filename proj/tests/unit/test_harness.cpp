#include <doctest.h>

#include "tracewise/error.hpp"
#include "tracewise/harness.hpp"
#include "tracewise/solvers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace tracewise;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("tracewise_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST_CASE("prompts carry the format contract and the question") {
    auto counting = generate_instance(TaskKind::CountingElements, {{"length", 20}}, 1);
    auto p = build_prompt(counting);
    CHECK(p.find("CHECK(i)==<current_count>") != std::string::npos);
    CHECK(p.find(render_question(counting)) != std::string::npos);
    CHECK(p.find("<answer>") != std::string::npos);
    CHECK(p.find("{{") == std::string::npos);

    auto game = make_instance(TaskKind::Game24, Game24Payload{{12, 13, 2, 8}});
    CHECK(build_prompt(game).find("ATTEMPT(candidate_expression)==<computed_result>") != std::string::npos);
    CHECK(render_question(game) == "Input: [12, 13, 2, 8]");

    auto ones = make_instance(TaskKind::CountingElements, CountingPayload{"131", '1'});
    CHECK(build_prompt(ones).find("CHECK(i)==<current_count>") != std::string::npos);
    const std::vector<std::int64_t> upper{2, 32, 9, 35, 38, 5, 6, 15, 78, 13, 54, 29, 1, 45, 44, 20, 49, 14, 25, 23, 34};
    auto seven = make_instance(TaskKind::HierarchicalClustering,
                               payload_from_json(TaskKind::HierarchicalClustering, {{"upper_triangle", upper}}));
    const auto cp = build_prompt(seven);
    CHECK(cp.find("  | A | B | C | D | E | F | G |\nA | - | 2 |32 | 9 |35 |38 | 5 |\n") != std::string::npos);

    for (auto kind : kAllTaskKinds)
        CHECK_FALSE(build_prompt(generate_instance(kind, {}, 2)).empty());
}

TEST_CASE("distance table layout") {
    ClusteringPayload p;
    p.points = 3;
    p.distance = {{0, 4, 12}, {4, 0, 7}, {12, 7, 0}};
    CHECK(render_distance_table(p) == "  | A | B | C |\nA | - | 4 |12 |\nB | - | - | 7 |\nC | - | - | - |\n");
}

TEST_CASE("template directory overrides") {
    auto dir = scratch("templates");
    auto inst = make_instance(TaskKind::PrimeFactorization, FactorizationPayload{91});
    CHECK_THROWS_AS(build_prompt(inst, dir.string()), Error);
    write(dir / "prime_factorization.txt", "Factor this.\n{{question}}\n");
    CHECK(build_prompt(inst, dir.string()) == "Factor this.\nInput: 91\n");
    write(dir / "prime_factorization.txt", "no slot here\n");
    try {
        build_prompt(inst, dir.string());
        FAIL("expected TemplateMissing");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TemplateMissing);
    }
}

TEST_CASE("response ingestion") {
    auto dir = scratch("ingest");
    SUBCASE("malformed line is named") {
        write(dir / "r.jsonl", R"({"instance_id":"a","run":0,"raw":"x"})"
                               "\n"
                               R"({"instance_id":"b","run":0,"raw":"y"})"
                               "\n"
                               "{not json\n");
        try {
            ingest_responses((dir / "r.jsonl").string());
            FAIL("expected FormatError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::FormatError);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("empty file") {
        write(dir / "e.jsonl", "");
        CHECK(ingest_responses((dir / "e.jsonl").string()).empty());
    }
    SUBCASE("repeated response or key") {
        write(dir / "d.jsonl", R"({"instance_id":"a","run":1,"model":"m","raw":"x"})"
                               "\n"
                               R"({"instance_id":"a","run":1,"model":"m","raw":"z"})"
                               "\n");
        CHECK_THROWS_AS(ingest_responses((dir / "d.jsonl").string()), Error);
        CHECK_THROWS_AS(parse_json_strict(R"({"raw":"a","raw":"b"})"), Error);
    }
    SUBCASE("unknown fields ignored, records round-trip") {
        write(dir / "u.jsonl", R"({"instance_id":"a","raw":"x","extra":[1,2],"thinking":"t"})"
                               "\n\n");
        auto rs = ingest_responses((dir / "u.jsonl").string());
        REQUIRE(rs.size() == 1);
        CHECK(rs[0].thinking == std::optional<std::string>("t"));
        auto back = record_from_json(record_to_json(rs[0]));
        CHECK(back.raw == "x");
        CHECK(back.instance_id == "a");
    }
    CHECK_THROWS_AS(ingest_responses((dir / "missing.jsonl").string()), Error);
}

TEST_CASE("policy tags") {
    CHECK(policy_tag(parse_policy("wanderer:0.1")) == "wanderer:0.1");
    CHECK(parse_policy("corrupted:ExecutionError").corruption == FindingKind::ExecutionError);
    CHECK(parse_policy("perfect").type == AgentPolicy::Type::Perfect);
    CHECK_THROWS_AS(parse_policy("wanderer:2"), Error);
    CHECK_THROWS_AS(parse_policy("corrupted:WrongAnswer"), Error);
    CHECK_THROWS_AS(parse_policy("greedy"), Error);
}

TEST_CASE("synthetic agent") {
    for (auto kind : kAllTaskKinds) {
        auto inst = generate_instance(kind, {}, 5);
        auto ref = canonical_trace(inst);
        CHECK(wanderer_trace(inst, ref, 0.0, 9) == ref.directives);
        auto perfect = synthetic_agent_respond(inst, AgentPolicy::perfect(), 1);
        auto verdict = audit_response(inst, ref, perfect.raw, std::nullopt);
        CHECK(verdict.findings.empty());
    }
    auto inst = make_instance(TaskKind::CountingElements, CountingPayload{"abcabc", 'a'});
    auto r = synthetic_agent_respond(inst, AgentPolicy::corrupted(FindingKind::ExecutionError), 3);
    CHECK(audit_response(inst, canonical_trace(inst), r.raw, std::nullopt).has(FindingKind::ExecutionError));
}

TEST_CASE("wanderer coverage tracks the per-path survival rate") {
    // Distinct elements: each leaf needs its n-1 decisions below the root kept.
    const double p_w = 0.1;
    auto inst = make_instance(TaskKind::PermutationWithDuplicates, PermutationPayload{{1, 2, 3, 4, 5}});
    auto ref = canonical_trace(inst);
    const int runs = 400;
    double sum = 0, sq = 0;
    for (int s = 0; s < runs; ++s) {
        auto t = wanderer_trace(inst, ref, p_w, static_cast<std::uint64_t>(s));
        ParsedTrace pt;
        pt.kind = inst.kind;
        pt.directives = t;
        pt.truncated = false;
        const double c = solution_coverage_ratio(inst, pt).coverage;
        sum += c;
        sq += c * c;
    }
    const double mean = sum / runs;
    const double sd = std::sqrt((sq - runs * mean * mean) / (runs - 1));
    CHECK(std::abs(mean - std::pow(1 - p_w, 4)) <= 4 * sd / std::sqrt(runs));
}

TEST_CASE("coverage ratio") {
    auto inst = make_instance(TaskKind::PermutationWithDuplicates, PermutationPayload{{1, 3, 1}});
    auto full = parse_trace(inst.kind, canonical_trace(inst).canonical_trace);
    auto point = solution_coverage_ratio(inst, full, "m");
    CHECK(point.coverage == 1.0);
    CHECK(point.solution_space_size == 3);
    auto partial = parse_trace(inst.kind, "CHECK([])==continue\nCHECK([1])==continue\nCHECK([1,1])==continue\n"
                                          "CHECK([1,1,3])==done\nCHECK([1,1,3])==done\nCHECK([3,3,3])==done\nEND()\n");
    CHECK(solution_coverage_ratio(inst, partial).reached == 1);
    auto other = make_instance(TaskKind::FloodFill, FloodFillPayload{{"1"}});
    CHECK_THROWS_AS(solution_coverage_ratio(other, full), Error);
}

TEST_CASE("aggregation") {
    CHECK_THROWS_AS(aggregate_campaign({}), Error);
    VerdictRecord a, b;
    a.instance_id = "x";
    a.kind = b.kind = TaskKind::PermutationWithDuplicates;
    a.model = b.model = "m";
    a.size_bucket = b.size_bucket = 6;
    a.coverage = 0.5;
    a.verdict.final_answer_correct = false;
    b.instance_id = "x";
    b.run = 1;
    b.coverage = 1.0;
    b.verdict.final_answer_correct = true;
    auto s = aggregate_campaign({b, a});
    REQUIRE(s.groups.size() == 1);
    CHECK(*s.groups[0].mean_coverage == doctest::Approx(0.75));
    CHECK(*s.groups[0].std_coverage == doctest::Approx(std::sqrt(0.125)));
    CHECK(s.groups[0].accuracy == doctest::Approx(0.5));
    CHECK(s.records[0].run == 0);
}
