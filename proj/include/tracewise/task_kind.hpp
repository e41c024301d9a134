#pragma once

#include <array>
#include <string_view>

namespace tracewise {

enum class TaskKind {
    CountingElements,
    SlidingWindowMax,
    FloodFill,
    EditDistance,
    HierarchicalClustering,
    PrimeFactorization,
    PermutationWithDuplicates,
    Game24,
};

inline constexpr std::array<TaskKind, 8> kAllTaskKinds = {
    TaskKind::CountingElements,       TaskKind::SlidingWindowMax,
    TaskKind::FloodFill,              TaskKind::EditDistance,
    TaskKind::HierarchicalClustering, TaskKind::PrimeFactorization,
    TaskKind::PermutationWithDuplicates, TaskKind::Game24,
};

// Identifiers used in every file format.
std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

} // namespace tracewise
