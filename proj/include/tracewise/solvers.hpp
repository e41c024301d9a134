#pragma once

#include "tracewise/expression.hpp"
#include "tracewise/instance.hpp"
#include "tracewise/trace.hpp"

#include <set>
#include <string>
#include <vector>

namespace tracewise {

struct ReferenceSolution {
    std::string canonical_trace;
    std::vector<Directive> directives;
    Answer final_answer;
    std::set<std::string> goal_states;
    std::string solver_name;
};

ReferenceSolution canonical_trace(const TaskInstance& instance);
Answer reference_answer(const TaskInstance& instance);

// Independent answers by a different algorithm family. Throws
// TooLargeForOracle beyond the per-kind caps.
Answer brute_force_oracle(const TaskInstance& instance);

// Unique permutations as path keys for permutation instances; the witness
// canonical forms for Game24; {"END"} for single-goal kinds.
std::set<std::string> goal_state_set(const TaskInstance& instance);

// All unique permutations of a multiset, lexicographic.
std::vector<std::vector<int>> unique_permutations(std::vector<int> elements);

// Child paths of a permutation prefix under the first-occurrence rule, in
// ascending order of the appended value.
std::vector<std::vector<int>> permutation_children(const std::vector<int>& sorted_elements,
                                                   const std::vector<int>& path);

// Candidate expressions of the fixed enumeration order, deduplicated by
// canonical form. Division by zero candidates are dropped.
struct Game24Candidate {
    ExprPtr expr;
    std::string text;
    std::string canonical;
    Rational value;
};
const std::vector<Game24Candidate>& game24_candidates(const std::array<int, 4>& cards);
bool game24_solvable(const std::array<int, 4>& cards);

// Single-linkage distance between two clusters named by their point labels.
std::int64_t single_link(const ClusteringPayload& p, const std::string& a, const std::string& b);

bool is_prime(std::uint64_t n);
std::uint64_t next_prime(std::uint64_t p);

// Connected land components, each as a list of cells in discovery order.
std::vector<std::vector<std::pair<int, int>>> flood_components(const FloodFillPayload& p);

} // namespace tracewise
