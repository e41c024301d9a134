#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tracewise {

struct StateRef {
    std::string key;
    bool operator==(const StateRef&) const = default;
    bool operator<(const StateRef& o) const { return key < o.key; }
};

struct AbstractProblem {
    StateRef initial;
    std::function<bool(const StateRef&)> is_goal;
    std::function<std::vector<StateRef>(const StateRef&)> successors;
    // Optional membership test equivalent to searching successors(from).
    // Adapters with very wide successor lists set it.
    std::function<bool(const StateRef& from, const StateRef& to)> is_successor;

    bool reaches(const StateRef& from, const StateRef& to) const;
};

struct AnnotatedTrace {
    std::vector<StateRef> steps;
    std::vector<std::size_t> goal_indices;
    std::vector<std::size_t> deadend_indices;
    std::optional<std::size_t> first_invalid;
};

AnnotatedTrace validate_transitions(const AbstractProblem& problem, const std::vector<StateRef>& steps);

bool is_effective(const AnnotatedTrace& annotated);

struct NecessityReport {
    std::vector<std::size_t> positions; // ascending
    bool exact = true;
};

NecessityReport necessity_scan(const AbstractProblem& problem, const AnnotatedTrace& annotated,
                               std::size_t exact_limit = 64);

} // namespace tracewise
