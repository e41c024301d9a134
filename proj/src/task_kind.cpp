#include "tracewise/task_kind.hpp"

#include "tracewise/error.hpp"

#include <string>

namespace tracewise {

std::string_view to_string(TaskKind kind) {
    switch (kind) {
    case TaskKind::CountingElements: return "counting_elements";
    case TaskKind::SlidingWindowMax: return "sliding_window_max";
    case TaskKind::FloodFill: return "flood_fill";
    case TaskKind::EditDistance: return "edit_distance";
    case TaskKind::HierarchicalClustering: return "hierarchical_clustering";
    case TaskKind::PrimeFactorization: return "prime_factorization";
    case TaskKind::PermutationWithDuplicates: return "permutation_with_duplicates";
    case TaskKind::Game24: return "game24";
    }
    return "unknown";
}

TaskKind parse_task_kind(std::string_view text) {
    for (auto kind : kAllTaskKinds)
        if (to_string(kind) == text)
            return kind;
    fail(ErrorCode::FormatError, "unknown task kind '" + std::string(text) + "'");
}

} // namespace tracewise
