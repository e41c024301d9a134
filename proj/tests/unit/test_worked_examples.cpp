#include <doctest.h>

#include "tracewise/expression.hpp"
#include "tracewise/solvers.hpp"
#include "tracewise/trace.hpp"

using namespace tracewise;

namespace {

const char* kPermutation131 = R"(CHECK([])==continue
CHECK([1])==continue
CHECK([1,1])==continue
CHECK([1,1,3])==done
BACKTRACK([1,1])
BACKTRACK([1])
CHECK([1,3])==continue
CHECK([1,3,1])==done
BACKTRACK([1,3])
BACKTRACK([1])
BACKTRACK([])
CHECK([3])==continue
CHECK([3,1])==continue
CHECK([3,1,1])==done
BACKTRACK([3,1])
BACKTRACK([3])
BACKTRACK([])
END()
)";

const char* kFactor44460 = R"(STATE(44460);
ATTEMPT(44460,2)==True;
STATE(22230);
ATTEMPT(22230,2)==True;
STATE(11115);
ATTEMPT(11115,2)==False;
ATTEMPT(11115,3)==True;
STATE(3705);
ATTEMPT(3705,3)==True;
STATE(1235);
ATTEMPT(1235,3)==False;
ATTEMPT(1235,5)==True;
STATE(247);
ATTEMPT(247,5)==False;
ATTEMPT(247,7)==False;
ATTEMPT(247,11)==False;
ATTEMPT(247,13)==True;
STATE(19);
ATTEMPT(19,13)==False;
ATTEMPT(19,17)==False;
ATTEMPT(19,19)==True;
STATE(1);
END()==[2,2,3,3,5,13,19];
)";

std::vector<std::int64_t> ints(std::initializer_list<std::int64_t> v) { return v; }

} // namespace

TEST_CASE("counting question: four h at 42, 45, 66, 79") {
    const std::string seq = "taigwu cnagpaguqgszayvke kcc szwq lrzt rvbhichditllgi usfwfl trv yhajig  jum oih";
    auto inst = make_instance(TaskKind::CountingElements, CountingPayload{seq, 'h'});
    auto ref = canonical_trace(inst);
    CHECK(ref.final_answer.scalar == 4);
    std::vector<std::int64_t> hits;
    std::int64_t seen = 0;
    for (const auto& d : ref.directives)
        if (d.type == DirectiveType::Check && d.result->as_int() > seen) {
            seen = d.result->as_int();
            hits.push_back(d.args.at(0).as_int());
        }
    CHECK(hits == ints({42, 45, 66, 79}));
}

TEST_CASE("sliding window answers") {
    auto q = make_instance(TaskKind::SlidingWindowMax,
                           SlidingWindowPayload{{81, 14, 3, 94, 35, 31, 28, 17, 94, 13, 86, 94, 69, 11, 75,
                                                 54, 4, 3, 11, 27, 29, 64, 77, 3, 71, 25, 91, 83, 89, 69},
                                                5});
    CHECK(reference_answer(q).values.size() == 26);
    auto ex = make_instance(TaskKind::SlidingWindowMax, SlidingWindowPayload{{2, 7, 4, 3, 6}, 3});
    CHECK(reference_answer(ex).values == ints({7, 7, 6}));
}

TEST_CASE("clustering question ends {ABCDEG}, F at 13") {
    const std::vector<std::int64_t> upper{2, 32, 9, 35, 38, 5, 6, 15, 78, 13, 54, 29, 1, 45, 44, 20, 49, 14, 25, 23, 34};
    auto inst = make_instance(TaskKind::HierarchicalClustering,
                              payload_from_json(TaskKind::HierarchicalClustering, {{"upper_triangle", upper}}));
    auto ref = canonical_trace(inst);
    CHECK(ref.final_answer.clusters.first == "ABCDEG");
    CHECK(ref.final_answer.clusters.second == "F");
    CHECK(ref.final_answer.clusters.distance == 13);
    REQUIRE(ref.directives.back().type == DirectiveType::End);
    // Braces around a cluster name are optional in the trace language.
    auto written = parse_trace(TaskKind::HierarchicalClustering, "END()=={ABCDEG,F,13}");
    REQUIRE(written.directives.size() == 1);
    CHECK(written.directives[0] == ref.directives.back());
    CHECK(serialize_directive(ref.directives.back()) == "END()=={{ABCDEG},F,13}");
}

TEST_CASE("factorizations") {
    auto a = make_instance(TaskKind::PrimeFactorization, FactorizationPayload{177750});
    CHECK(reference_answer(a).values == ints({2, 3, 3, 5, 5, 5, 79}));
    auto b = make_instance(TaskKind::PrimeFactorization, FactorizationPayload{44460});
    CHECK(reference_answer(b).values == ints({2, 2, 3, 3, 5, 13, 19}));
    CHECK(canonical_trace(b).canonical_trace == std::string(kFactor44460));
}

TEST_CASE("24 expressions evaluate exactly") {
    auto r1 = verify_expression_24("8*(2+13-12)", {12, 13, 2, 8});
    CHECK(r1.value == Rational(24));
    CHECK(r1.cards_ok);
    auto r2 = verify_expression_24("4*6*(8/8)", {4, 8, 8, 6});
    CHECK(r2.value == Rational(24));
    CHECK(r2.cards_ok);
    CHECK(r2.violations.empty());
}

TEST_CASE("verbatim examples parse without diagnostics") {
    auto p = parse_trace(TaskKind::PermutationWithDuplicates, kPermutation131);
    CHECK(p.diagnostics.empty());
    CHECK(p.directives.size() == 18);
    CHECK_FALSE(p.truncated);
    auto inst = make_instance(TaskKind::PermutationWithDuplicates, PermutationPayload{{1, 3, 1}});
    CHECK(canonical_trace(inst).directives == p.directives);

    auto f = parse_trace(TaskKind::PrimeFactorization, kFactor44460);
    CHECK(f.diagnostics.empty());
    CHECK(f.directives.size() == 23);
}
