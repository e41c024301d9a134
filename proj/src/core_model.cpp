#include "tracewise/core_model.hpp"

#include "tracewise/error.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

namespace tracewise {

bool AbstractProblem::reaches(const StateRef& from, const StateRef& to) const {
    if (is_successor)
        return is_successor(from, to);
    const auto next = successors(from);
    return std::find(next.begin(), next.end(), to) != next.end();
}

namespace {

struct Counts {
    std::size_t goals = 0;
    std::size_t deadends = 0;
};

// Goal and dead-end marks for a step list; the prefix set grows as we go.
void mark(const AbstractProblem& problem, const std::vector<StateRef>& steps,
          std::vector<std::size_t>* goals, std::vector<std::size_t>* deadends, Counts* counts) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        seen.insert(steps[i].key);
        if (problem.is_goal(steps[i])) {
            if (goals)
                goals->push_back(i);
            if (counts)
                ++counts->goals;
            continue;
        }
        bool dead = true;
        for (const auto& s : problem.successors(steps[i]))
            if (!seen.count(s.key)) {
                dead = false;
                break;
            }
        if (dead) {
            if (deadends)
                deadends->push_back(i);
            if (counts)
                ++counts->deadends;
        }
    }
}

bool chain_valid(const AbstractProblem& problem, const std::vector<StateRef>& steps) {
    if (steps.empty() || !(steps[0] == problem.initial))
        return false;
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (!problem.reaches(steps[i - 1], steps[i]))
            return false;
    return true;
}

} // namespace

AnnotatedTrace validate_transitions(const AbstractProblem& problem, const std::vector<StateRef>& steps) {
    if (steps.empty())
        fail(ErrorCode::EmptyTrace, "trace has no steps");
    AnnotatedTrace out;
    out.steps = steps;
    if (!(steps[0] == problem.initial)) {
        out.first_invalid = 0;
    } else {
        for (std::size_t i = 1; i < steps.size(); ++i)
            if (!problem.reaches(steps[i - 1], steps[i])) {
                out.first_invalid = i;
                break;
            }
    }
    mark(problem, steps, &out.goal_indices, &out.deadend_indices, nullptr);
    return out;
}

bool is_effective(const AnnotatedTrace& annotated) { return !annotated.goal_indices.empty(); }

NecessityReport necessity_scan(const AbstractProblem& problem, const AnnotatedTrace& annotated,
                               std::size_t exact_limit) {
    if (annotated.first_invalid)
        fail(ErrorCode::InvalidTraceInput, "trace has an invalid transition at step " +
                                               std::to_string(*annotated.first_invalid));
    const auto& steps = annotated.steps;
    const std::size_t n = steps.size();
    NecessityReport report;
    std::set<std::size_t> flagged;

    if (n <= exact_limit) {
        const std::size_t goals = annotated.goal_indices.size();
        const std::size_t deadends = annotated.deadend_indices.size();
        // Step 0 is the initial state and never removable.
        for (std::size_t a = 1; a < n; ++a) {
            for (std::size_t b = a; b < n; ++b) {
                if (b + 1 < n && !problem.reaches(steps[a - 1], steps[b + 1]))
                    continue;
                std::vector<StateRef> rest(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(a));
                rest.insert(rest.end(), steps.begin() + static_cast<std::ptrdiff_t>(b + 1), steps.end());
                if (!chain_valid(problem, rest))
                    continue;
                Counts c;
                mark(problem, rest, nullptr, nullptr, &c);
                if (c.goals == goals && c.deadends == deadends)
                    for (std::size_t k = a; k <= b; ++k)
                        flagged.insert(k);
            }
        }
        report.exact = true;
    } else {
        // Heuristic: a transition taken twice, or a block repeated back to back.
        std::set<std::pair<std::string, std::string>> edges;
        for (std::size_t i = 1; i < n; ++i)
            if (!edges.insert({steps[i - 1].key, steps[i].key}).second)
                flagged.insert(i);
        for (std::size_t len = 1; len * 2 <= n && len <= 32; ++len)
            for (std::size_t start = 0; start + 2 * len <= n; ++start) {
                bool same = true;
                for (std::size_t k = 0; k < len && same; ++k)
                    same = steps[start + k] == steps[start + len + k];
                if (same)
                    for (std::size_t k = 0; k < len; ++k)
                        flagged.insert(start + len + k);
            }
        report.exact = false;
    }
    report.positions.assign(flagged.begin(), flagged.end());
    return report;
}

} // namespace tracewise
