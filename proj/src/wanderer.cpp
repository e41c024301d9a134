#include "tracewise/wanderer.hpp"

#include "tracewise/error.hpp"
#include "tracewise/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>
#include <vector>

namespace tracewise {

namespace {

constexpr std::uint64_t kShardTrials = 8192;

void validate(int d, std::uint64_t m, double q_w) {
    if (d < 1)
        fail(ErrorCode::DomainError, "depth must be at least 1");
    if (!(q_w >= 0.0 && q_w <= 1.0))
        fail(ErrorCode::DomainError, "q_w must lie in [0, 1]");
    if (m < 1 || (d < 64 && m > (std::uint64_t{1} << d)))
        fail(ErrorCode::DomainError, "m must lie in [1, 2^d]");
}

double survival(int d, double q_w) {
    if (d == 1)
        return 1.0;
    if (q_w == 0.0)
        return 0.0;
    return std::exp(static_cast<double>(d - 1) * std::log(q_w));
}

SuccessEstimate finish(std::uint64_t hits, std::uint64_t trials, WandererModel model) {
    SuccessEstimate e;
    e.trials = trials;
    e.model = model;
    e.estimate = static_cast<double>(hits) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials));
    return e;
}

} // namespace

std::string_view to_string(WandererModel model) {
    return model == WandererModel::IndependentPath ? "independent-path" : "shared-tree";
}

double log_failure_probability(int d, std::uint64_t m, double q_w) {
    validate(d, m, q_w);
    return static_cast<double>(m) * std::log1p(-survival(d, q_w));
}

double success_probability(int d, std::uint64_t m, double q_w) {
    return -std::expm1(log_failure_probability(d, m, q_w));
}

SuccessEstimate simulate_independent(const WandererParams& params, unsigned workers) {
    validate(params.d, params.m, params.q_w);
    if (params.trials < 1)
        fail(ErrorCode::DomainError, "trials must be at least 1");
    const double s = survival(params.d, params.q_w);
    const std::uint64_t shards = (params.trials + kShardTrials - 1) / kShardTrials;
    std::vector<std::uint64_t> hits(shards, 0);
    auto run_shard = [&](std::uint64_t shard) {
        Rng rng(derive_seed(params.seed, shard));
        const auto begin = shard * kShardTrials;
        const auto end = std::min(params.trials, begin + kShardTrials);
        std::uint64_t h = 0;
        for (auto t = begin; t < end; ++t) {
            for (std::uint64_t k = 0; k < params.m; ++k)
                if (rng.uniform01() < s) {
                    ++h;
                    break;
                }
        }
        hits[shard] = h;
    };
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, shards));
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < shards; ++i)
            run_shard(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (auto i = next++; i < shards; i = next++)
                    run_shard(i);
            });
        for (auto& t : pool)
            t.join();
    }
    std::uint64_t total = 0;
    for (auto h : hits)
        total += h;
    return finish(total, params.trials, WandererModel::IndependentPath);
}

SuccessEstimate simulate_tree(int d, std::uint64_t m, double p_w, std::uint64_t budget, std::uint64_t trials,
                              std::uint64_t seed) {
    validate(d, m, 1.0 - p_w);
    if (d > 40)
        fail(ErrorCode::DomainError, "shared-tree simulation supports depth up to 40");
    if (trials < 1 || budget < 1)
        fail(ErrorCode::DomainError, "trials and budget must be at least 1");
    const std::uint64_t leaves = std::uint64_t{1} << d;
    Rng rng(seed);
    std::uint64_t hits = 0;
    struct Frame {
        int depth;
        std::uint64_t prefix;
    };
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::set<std::uint64_t> targets;
        while (targets.size() < m)
            targets.insert(static_cast<std::uint64_t>(rng.uniform_int(0, static_cast<std::int64_t>(leaves - 1))));
        // Pruning decisions are drawn on first arrival, in DFS order.
        std::vector<Frame> stack{{0, 0}};
        std::uint64_t steps = 0;
        bool found = false;
        while (!stack.empty() && steps < budget) {
            auto f = stack.back();
            stack.pop_back();
            ++steps;
            if (f.depth == d) {
                if (targets.count(f.prefix)) {
                    found = true;
                    break;
                }
                continue;
            }
            bool keep[2] = {true, true};
            if (f.depth > 0)
                for (bool& k : keep)
                    k = !rng.bernoulli(p_w);
            for (int c = 1; c >= 0; --c)
                if (keep[c])
                    stack.push_back({f.depth + 1, (f.prefix << 1) | static_cast<std::uint64_t>(c)});
        }
        hits += found;
    }
    return finish(hits, trials, WandererModel::SharedTree);
}

std::optional<DepthRange> plateau_scan(std::uint64_t m, double q_w, double threshold, int d_max) {
    if (!(threshold > 0.0 && threshold < 1.0))
        fail(ErrorCode::DomainError, "threshold must lie in (0, 1)");
    if (d_max < 1)
        fail(ErrorCode::DomainError, "d_max must be at least 1");
    int hi = 1;
    for (int d = 2; d <= d_max; ++d) {
        if (d < 64 && m > (std::uint64_t{1} << d))
            continue; // too few leaves for m targets at this depth
        if (success_probability(d, m, q_w) <= threshold)
            break;
        hi = d;
    }
    if (d_max >= 2 && hi == 1)
        return std::nullopt;
    return DepthRange{1, hi};
}

} // namespace tracewise
