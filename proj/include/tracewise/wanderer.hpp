#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace tracewise {

struct WandererParams {
    int d = 1;
    std::uint64_t m = 1;
    double q_w = 1.0; // per-decision retention, 1 - p_w
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
};

enum class WandererModel { IndependentPath, SharedTree };

std::string_view to_string(WandererModel model);

struct SuccessEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    WandererModel model = WandererModel::IndependentPath;
};

// 1 - (1 - q_w^(d-1))^m. Throws DomainError on bad parameters.
double success_probability(int d, std::uint64_t m, double q_w);

// log of the failure probability (1 - q_w^(d-1))^m. Stays strictly ordered
// where success_probability has already rounded to 1.
double log_failure_probability(int d, std::uint64_t m, double q_w);

// Each target survives independently with probability q_w^(d-1). Trials run
// in fixed-size shards with their own derived streams, so the result does not
// depend on the number of workers (0 picks the hardware concurrency).
SuccessEstimate simulate_independent(const WandererParams& params, unsigned workers = 0);

// DFS over one shared binary tree of depth d. On first arrival at a node below
// the root each child is pruned with probability p_w. Success when a target
// leaf is visited within budget node visits.
SuccessEstimate simulate_tree(int d, std::uint64_t m, double p_w, std::uint64_t budget,
                              std::uint64_t trials, std::uint64_t seed);

struct DepthRange {
    int lo = 1;
    int hi = 1;
};

// Depths [1, d*] with success above threshold. Empty when depth 2, the first
// depth with any decision, is already at or below it.
std::optional<DepthRange> plateau_scan(std::uint64_t m, double q_w, double threshold, int d_max = 200);

} // namespace tracewise
