#include <doctest.h>

#include "tracewise/adapters.hpp"
#include "tracewise/core_model.hpp"
#include "tracewise/error.hpp"
#include "tracewise/expression.hpp"
#include "tracewise/solvers.hpp"
#include "tracewise/trace.hpp"

#include <map>

using namespace tracewise;

namespace {

SizeParams small_size(TaskKind kind) {
    switch (kind) {
    case TaskKind::CountingElements: return {{"length", 30}};
    case TaskKind::SlidingWindowMax: return {{"length", 12}, {"window", 3}};
    case TaskKind::FloodFill: return {{"rows", 4}, {"cols", 5}};
    case TaskKind::EditDistance: return {{"source_length", 5}, {"target_length", 4}};
    case TaskKind::HierarchicalClustering: return {{"points", 6}};
    case TaskKind::PrimeFactorization: return {{"max_value", 5000}};
    case TaskKind::PermutationWithDuplicates: return {{"length", 5}, {"distinct", 3}};
    case TaskKind::Game24: return {};
    }
    return {};
}

} // namespace

TEST_CASE("reference answers agree with the brute force oracle") {
    for (auto kind : kAllTaskKinds) {
        CAPTURE(to_string(kind));
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto inst = generate_instance(kind, small_size(kind), seed);
            CAPTURE(instance_to_json(inst).dump());
            CHECK(answers_equal(inst, reference_answer(inst), brute_force_oracle(inst)));
        }
    }
}

TEST_CASE("canonical traces round-trip through text") {
    for (auto kind : kAllTaskKinds) {
        CAPTURE(to_string(kind));
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto inst = generate_instance(kind, {}, seed);
            ReferenceSolution ref;
            try {
                ref = canonical_trace(inst);
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::NoSolution);
                continue;
            }
            auto parsed = parse_trace(kind, ref.canonical_trace);
            CHECK(parsed.diagnostics.empty());
            CHECK_FALSE(parsed.truncated);
            CHECK(parsed.directives == ref.directives);
            CHECK(serialize_trace(parsed) == ref.canonical_trace);
        }
    }
}

TEST_CASE("generation is deterministic in the seed") {
    for (auto kind : kAllTaskKinds) {
        auto a = generate_instance(kind, {}, 7);
        auto b = generate_instance(kind, {}, 7);
        CHECK(instance_to_json(a) == instance_to_json(b));
        CHECK(instance_to_json(instance_from_json(instance_to_json(a))) == instance_to_json(a));
    }
}

TEST_CASE("size parameters are range checked") {
    CHECK_THROWS_AS(generate_instance(TaskKind::FloodFill, {{"rows", 0}}, 1), Error);
    CHECK_THROWS_AS(generate_instance(TaskKind::PermutationWithDuplicates, {{"length", 10}}, 1), Error);
}

TEST_CASE("24 solvability matches an exhaustive count over all hands") {
    int solvable = 0;
    for (int a = 1; a <= 13; ++a)
        for (int b = a; b <= 13; ++b)
            for (int c = b; c <= 13; ++c)
                for (int d = c; d <= 13; ++d)
                    solvable += game24_solvable({a, b, c, d});
    CHECK(solvable == 1362);
    CHECK(game24_solvable({3, 3, 8, 8}));
    CHECK(game24_solvable({1, 5, 5, 5}));
    CHECK_FALSE(game24_solvable({1, 1, 1, 1}));
}

TEST_CASE("edit distances and island counts") {
    auto ed = [](const char* s, const char* t) {
        return reference_answer(make_instance(TaskKind::EditDistance, EditDistancePayload{s, t})).scalar;
    };
    CHECK(ed("kitten", "sitting") == 3);
    CHECK(ed("intention", "execution") == 5);
    CHECK(ed("", "abc") == 3);
    CHECK(ed("abcd", "dcba") == 4);
    auto islands = reference_answer(make_instance(TaskKind::FloodFill, FloodFillPayload{{"110", "010", "001"}}));
    CHECK(islands.scalar == 2);
}

TEST_CASE("multinomial counts") {
    CHECK(multinomial_count({1, 1, 1, 1, 2, 1, 1, 1, 1}) == 9);
    CHECK(multinomial_count({1, 1, 2, 2, 2, 3, 4}) == 420);
    CHECK(unique_permutations({1, 3, 1}).size() == 3);
}

TEST_CASE("expression parsing and canonical forms") {
    CHECK(evaluate(*parse_expression("12 / (13 - 8 - 2)")) == Rational(4));
    CHECK(canonical_form(*parse_expression("(12*2)+(13-13)")) != canonical_form(*parse_expression("12*2")));
    CHECK(canonical_form(*parse_expression("8*(13-12+2)")) == canonical_form(*parse_expression("8*((13-12)+2)")));
    CHECK(canonical_form(*parse_expression("2*13-12/8")) == canonical_form(*parse_expression("13*2-12/8")));
    CHECK_THROWS_AS(evaluate(*parse_expression("8/(2-2)")), Error);
    CHECK_THROWS_AS(parse_expression("8*(2+"), Error);
    CHECK(format_rational(Rational(49, 2)) == "24.5");
    CHECK(decimal_matches(Rational(96, 11), "8.727"));
    CHECK_FALSE(decimal_matches(Rational(96, 11), "8.72"));
}

TEST_CASE("parser diagnostics") {
    SUBCASE("missing END is truncated") {
        auto p = parse_trace(TaskKind::CountingElements, "CHECK(3)==1;\nCHECK(5)==2;\n");
        CHECK(p.truncated);
        CHECK(p.directives.size() == 2);
    }
    SUBCASE("garbage lines warn and are skipped") {
        auto p = parse_trace(TaskKind::CountingElements, "CHECK(3)==1;\nthis is prose\nEND()==1\n");
        CHECK(p.directives.size() == 2);
        CHECK_FALSE(p.diagnostics.empty());
        CHECK_FALSE(p.has_fatal());
    }
    SUBCASE("directive foreign to the kind") {
        auto p = parse_trace(TaskKind::CountingElements, "MERGE(A,B)=={AB};\nEND()==0\n");
        CHECK_FALSE(p.diagnostics.empty());
    }
    SUBCASE("answer tags") {
        auto b = extract_answer_block("thinking...\n<answer>\nEND()==0\n</answer>\n");
        CHECK(b.had_tags);
        CHECK(b.payload == "\nEND()==0\n");
        CHECK_FALSE(extract_answer_block("no tags").had_tags);
    }
}

TEST_CASE("abstract model on a small chain") {
    // 0 -> 1 -> 2 (goal), 0 -> 3 -> 1
    std::map<std::string, std::vector<std::string>> succ{{"0", {"1", "3"}}, {"1", {"2"}}, {"2", {}}, {"3", {"1"}}};
    AbstractProblem p;
    p.initial = {"0"};
    p.is_goal = [](const StateRef& s) { return s.key == "2"; };
    p.successors = [&](const StateRef& s) {
        std::vector<StateRef> out;
        for (const auto& k : succ[s.key])
            out.push_back({k});
        return out;
    };
    auto ok = validate_transitions(p, {{"0"}, {"1"}, {"2"}});
    CHECK_FALSE(ok.first_invalid.has_value());
    CHECK(is_effective(ok));
    auto bad = validate_transitions(p, {{"0"}, {"2"}});
    REQUIRE(bad.first_invalid.has_value());
    CHECK(*bad.first_invalid == 1);
    auto detour = validate_transitions(p, {{"0"}, {"3"}, {"1"}, {"2"}});
    CHECK(is_effective(detour));
    auto nec = necessity_scan(p, detour);
    CHECK(nec.positions == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(necessity_scan(p, bad), Error);
}

TEST_CASE("adapters accept the canonical trace of every kind") {
    for (auto kind : kAllTaskKinds) {
        CAPTURE(to_string(kind));
        auto inst = generate_instance(kind, small_size(kind), 3);
        auto ref = canonical_trace(inst);
        auto problem = adapt_to_abstract(inst);
        auto annotated = validate_transitions(problem, trace_to_steps(inst, ref.directives));
        CHECK_FALSE(annotated.first_invalid.has_value());
        CHECK(is_effective(annotated));
    }
}
