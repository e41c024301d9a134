#pragma once

#include "tracewise/task_kind.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace tracewise {

struct CountingPayload {
    std::string sequence;
    char target = 'a';
};

struct SlidingWindowPayload {
    std::vector<std::int64_t> values;
    std::int64_t window = 1;
};

struct FloodFillPayload {
    std::vector<std::string> grid; // rows of '1' (land) and '0' (water)
    int rows() const { return static_cast<int>(grid.size()); }
    int cols() const { return grid.empty() ? 0 : static_cast<int>(grid[0].size()); }
    bool land(int r, int c) const { return grid[r][c] == '1'; }
};

struct EditDistancePayload {
    std::string source;
    std::string target;
};

// Points are labelled 'A', 'B', ... in order.
struct ClusteringPayload {
    int points = 0;
    std::vector<std::vector<std::int64_t>> distance;
    std::string labels() const;
};

struct FactorizationPayload {
    std::uint64_t n = 2;
};

struct PermutationPayload {
    std::vector<int> elements; // as given, unsorted
};

struct Game24Payload {
    std::array<int, 4> cards{};
};

using Payload = std::variant<CountingPayload, SlidingWindowPayload, FloodFillPayload,
                             EditDistancePayload, ClusteringPayload, FactorizationPayload,
                             PermutationPayload, Game24Payload>;

using SizeParams = std::map<std::string, std::int64_t>;

struct TaskInstance {
    TaskKind kind = TaskKind::CountingElements;
    std::uint64_t seed = 0;
    SizeParams size;
    Payload payload;
    std::string instance_id;
    bool explicit_payload = false;

    template <class T>
    const T& as() const { return std::get<T>(payload); }
};

struct SizeBound {
    std::string name;
    std::int64_t lo;
    std::int64_t hi;
    std::int64_t fallback;
};

// Documented per-kind size parameters with inclusive bounds and defaults.
const std::vector<SizeBound>& size_bounds(TaskKind kind);

TaskInstance generate_instance(TaskKind kind, const SizeParams& size, std::uint64_t seed);

// Admits a caller-supplied payload; size is derived from the payload.
TaskInstance make_instance(TaskKind kind, Payload payload);

nlohmann::json payload_to_json(const Payload& payload);
Payload payload_from_json(TaskKind kind, const nlohmann::json& j);
nlohmann::json instance_to_json(const TaskInstance& instance);
TaskInstance instance_from_json(const nlohmann::json& j);

// Solution-space size used for bucketing: the unique-permutation count for
// permutations, otherwise the main size parameter of the kind.
std::uint64_t size_bucket(const TaskInstance& instance);

std::uint64_t multinomial_count(const std::vector<int>& elements);

struct ClusterAnswer {
    std::string first;
    std::string second;
    std::int64_t distance = 0;
};

struct Game24Answer {
    bool solvable = false;
    std::string witness;
};

// Final answer of any kind. Only the fields of the matching kind are used.
struct Answer {
    TaskKind kind = TaskKind::CountingElements;
    std::int64_t scalar = 0;              // counting, flood fill, edit distance
    std::vector<std::int64_t> values;     // sliding maxima, prime factors
    ClusterAnswer clusters;               // clustering
    std::set<std::vector<int>> permutations;
    Game24Answer game;
};

bool answers_equal(const TaskInstance& instance, const Answer& a, const Answer& b);
nlohmann::json answer_to_json(const Answer& answer);
Answer answer_from_json(TaskKind kind, const nlohmann::json& j);

std::string path_key(const std::vector<int>& path);

} // namespace tracewise
