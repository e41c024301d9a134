#include "tracewise/instance.hpp"

#include "tracewise/error.hpp"
#include "tracewise/expression.hpp"
#include "tracewise/rng.hpp"
#include "tracewise/solvers.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace tracewise {

using nlohmann::json;

std::string ClusteringPayload::labels() const {
    std::string out;
    for (int i = 0; i < points; ++i)
        out += static_cast<char>('A' + i);
    return out;
}

const std::vector<SizeBound>& size_bounds(TaskKind kind) {
    static const std::map<TaskKind, std::vector<SizeBound>> table = {
        {TaskKind::CountingElements, {{"length", 1, 200, 40}, {"alphabet", 1, 27, 27}}},
        {TaskKind::SlidingWindowMax,
         {{"length", 1, 200, 30}, {"window", 1, 200, 5}, {"max_value", 1, 1000000, 99}}},
        {TaskKind::FloodFill, {{"rows", 1, 20, 6}, {"cols", 1, 20, 6}, {"density", 0, 100, 45}}},
        {TaskKind::EditDistance,
         {{"source_length", 0, 20, 6}, {"target_length", 0, 20, 6}, {"alphabet", 1, 26, 4}}},
        {TaskKind::HierarchicalClustering, {{"points", 2, 26, 7}, {"max_distance", 1, 1000000, 99}}},
        {TaskKind::PrimeFactorization,
         {{"min_value", 2, 10000000, 2}, {"max_value", 2, 10000000, 100000}}},
        {TaskKind::PermutationWithDuplicates,
         {{"length", 1, 9, 4}, {"distinct", 1, 9, 2}, {"max_value", 1, 9, 9}}},
        {TaskKind::Game24, {{"solvable_only", 0, 1, 1}, {"max_card", 1, 13, 13}}},
    };
    return table.at(kind);
}

namespace {

SizeParams resolve_size(TaskKind kind, const SizeParams& given) {
    const auto& bounds = size_bounds(kind);
    SizeParams out;
    for (const auto& b : bounds)
        out[b.name] = b.fallback;
    for (const auto& [key, value] : given) {
        auto it = std::find_if(bounds.begin(), bounds.end(),
                               [&](const SizeBound& b) { return b.name == key; });
        if (it == bounds.end())
            fail(ErrorCode::SizeOutOfRange,
                 "unknown size parameter '" + key + "' for " + std::string(to_string(kind)));
        if (value < it->lo || value > it->hi)
            fail(ErrorCode::SizeOutOfRange, key + "=" + std::to_string(value) + " outside [" +
                                                std::to_string(it->lo) + ", " +
                                                std::to_string(it->hi) + "]");
        out[key] = value;
    }
    return out;
}

std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string make_id(TaskKind kind, const std::string& material) {
    return std::string(to_string(kind)) + "-" +
           hex16(fnv1a64(std::string(to_string(kind)) + "|" + material));
}

Payload draw_payload(TaskKind kind, const SizeParams& s, Rng& rng) {
    switch (kind) {
    case TaskKind::CountingElements: {
        static const std::string symbols = "abcdefghijklmnopqrstuvwxyz ";
        const auto alphabet = s.at("alphabet");
        CountingPayload p;
        for (std::int64_t i = 0; i < s.at("length"); ++i)
            p.sequence += symbols[rng.uniform_int(0, alphabet - 1)];
        p.target = symbols[rng.uniform_int(0, std::min<std::int64_t>(alphabet, 26) - 1)];
        return p;
    }
    case TaskKind::SlidingWindowMax: {
        if (s.at("window") > s.at("length"))
            fail(ErrorCode::SizeOutOfRange, "window exceeds length");
        SlidingWindowPayload p;
        p.window = s.at("window");
        for (std::int64_t i = 0; i < s.at("length"); ++i)
            p.values.push_back(rng.uniform_int(1, s.at("max_value")));
        return p;
    }
    case TaskKind::FloodFill: {
        FloodFillPayload p;
        const double density = static_cast<double>(s.at("density")) / 100.0;
        for (std::int64_t r = 0; r < s.at("rows"); ++r) {
            std::string row;
            for (std::int64_t c = 0; c < s.at("cols"); ++c)
                row += rng.bernoulli(density) ? '1' : '0';
            p.grid.push_back(row);
        }
        return p;
    }
    case TaskKind::EditDistance: {
        EditDistancePayload p;
        const auto alphabet = s.at("alphabet");
        for (std::int64_t i = 0; i < s.at("source_length"); ++i)
            p.source += static_cast<char>('a' + rng.uniform_int(0, alphabet - 1));
        for (std::int64_t i = 0; i < s.at("target_length"); ++i)
            p.target += static_cast<char>('a' + rng.uniform_int(0, alphabet - 1));
        return p;
    }
    case TaskKind::HierarchicalClustering: {
        const int n = static_cast<int>(s.at("points"));
        const auto pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
        if (pairs > s.at("max_distance"))
            fail(ErrorCode::UnsatisfiableConstraint,
                 "max_distance too small for distinct pairwise distances");
        ClusteringPayload p;
        p.points = n;
        p.distance.assign(n, std::vector<std::int64_t>(n, 0));
        std::set<std::int64_t> used;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                std::int64_t d;
                do {
                    d = rng.uniform_int(1, s.at("max_distance"));
                } while (used.count(d));
                used.insert(d);
                p.distance[i][j] = p.distance[j][i] = d;
            }
        return p;
    }
    case TaskKind::PrimeFactorization: {
        if (s.at("min_value") > s.at("max_value"))
            fail(ErrorCode::SizeOutOfRange, "min_value exceeds max_value");
        FactorizationPayload p;
        p.n = static_cast<std::uint64_t>(rng.uniform_int(s.at("min_value"), s.at("max_value")));
        return p;
    }
    case TaskKind::PermutationWithDuplicates: {
        const auto length = s.at("length");
        const auto distinct = s.at("distinct");
        if (distinct > length)
            fail(ErrorCode::SizeOutOfRange, "distinct exceeds length");
        if (distinct > s.at("max_value"))
            fail(ErrorCode::UnsatisfiableConstraint, "distinct exceeds max_value");
        std::vector<int> pool;
        for (int v = 1; v <= s.at("max_value"); ++v)
            pool.push_back(v);
        rng.shuffle(pool.begin(), pool.end());
        std::vector<int> values(pool.begin(), pool.begin() + distinct);
        PermutationPayload p;
        p.elements = values;
        for (std::int64_t i = distinct; i < length; ++i)
            p.elements.push_back(values[rng.uniform_int(0, distinct - 1)]);
        rng.shuffle(p.elements.begin(), p.elements.end());
        return p;
    }
    case TaskKind::Game24: {
        const auto max_card = s.at("max_card");
        for (int attempt = 0; attempt < 10000; ++attempt) {
            Game24Payload p;
            for (auto& c : p.cards)
                c = static_cast<int>(rng.uniform_int(1, max_card));
            if (!s.at("solvable_only") || game24_solvable(p.cards))
                return p;
        }
        fail(ErrorCode::UnsatisfiableConstraint, "no solvable draw within 10000 attempts");
    }
    }
    fail(ErrorCode::SizeOutOfRange, "unknown kind");
}

SizeParams derived_size(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> SizeParams {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CountingPayload>)
                return {{"length", static_cast<std::int64_t>(p.sequence.size())}};
            else if constexpr (std::is_same_v<T, SlidingWindowPayload>)
                return {{"length", static_cast<std::int64_t>(p.values.size())}, {"window", p.window}};
            else if constexpr (std::is_same_v<T, FloodFillPayload>)
                return {{"rows", p.rows()}, {"cols", p.cols()}};
            else if constexpr (std::is_same_v<T, EditDistancePayload>)
                return {{"source_length", static_cast<std::int64_t>(p.source.size())},
                        {"target_length", static_cast<std::int64_t>(p.target.size())}};
            else if constexpr (std::is_same_v<T, ClusteringPayload>)
                return {{"points", p.points}};
            else if constexpr (std::is_same_v<T, FactorizationPayload>)
                return {{"value", static_cast<std::int64_t>(p.n)}};
            else if constexpr (std::is_same_v<T, PermutationPayload>) {
                std::set<int> d(p.elements.begin(), p.elements.end());
                return {{"length", static_cast<std::int64_t>(p.elements.size())},
                        {"distinct", static_cast<std::int64_t>(d.size())}};
            } else
                return {};
        },
        payload);
}

void validate_payload(TaskKind kind, const Payload& payload) {
    auto bad = [](const std::string& what) { fail(ErrorCode::SizeOutOfRange, what); };
    switch (kind) {
    case TaskKind::CountingElements: {
        const auto& p = std::get<CountingPayload>(payload);
        if (p.sequence.empty() || p.sequence.size() > 100000)
            bad("sequence length must be in [1, 100000]");
        break;
    }
    case TaskKind::SlidingWindowMax: {
        const auto& p = std::get<SlidingWindowPayload>(payload);
        if (p.values.empty() || p.window < 1 || p.window > static_cast<std::int64_t>(p.values.size()))
            bad("window must be in [1, length]");
        break;
    }
    case TaskKind::FloodFill: {
        const auto& p = std::get<FloodFillPayload>(payload);
        if (p.grid.empty() || p.grid.size() > 200)
            bad("grid rows must be in [1, 200]");
        for (const auto& row : p.grid) {
            if (row.size() != p.grid[0].size() || row.empty() || row.size() > 200)
                bad("grid rows must be equally long, 1..200 cells");
            if (row.find_first_not_of("01") != std::string::npos)
                bad("grid cells must be '0' or '1'");
        }
        break;
    }
    case TaskKind::EditDistance: {
        const auto& p = std::get<EditDistancePayload>(payload);
        if (p.source.size() > 500 || p.target.size() > 500)
            bad("strings longer than 500");
        break;
    }
    case TaskKind::HierarchicalClustering: {
        const auto& p = std::get<ClusteringPayload>(payload);
        if (p.points < 2 || p.points > 26)
            bad("points must be in [2, 26]");
        if (static_cast<int>(p.distance.size()) != p.points)
            bad("distance matrix shape");
        for (int i = 0; i < p.points; ++i) {
            if (static_cast<int>(p.distance[i].size()) != p.points)
                bad("distance matrix shape");
            for (int j = 0; j < p.points; ++j)
                if (i != j && p.distance[i][j] < 0)
                    bad("negative distance");
        }
        break;
    }
    case TaskKind::PrimeFactorization: {
        const auto& p = std::get<FactorizationPayload>(payload);
        if (p.n < 2 || p.n > 10000000)
            bad("value must be in [2, 10^7]");
        break;
    }
    case TaskKind::PermutationWithDuplicates: {
        const auto& p = std::get<PermutationPayload>(payload);
        if (p.elements.empty() || p.elements.size() > 12)
            bad("length must be in [1, 12]");
        break;
    }
    case TaskKind::Game24: {
        const auto& p = std::get<Game24Payload>(payload);
        for (int c : p.cards)
            if (c < 1 || c > 13)
                bad("cards must be in [1, 13]");
        break;
    }
    }
}

} // namespace

TaskInstance generate_instance(TaskKind kind, const SizeParams& size, std::uint64_t seed) {
    TaskInstance inst;
    inst.kind = kind;
    inst.seed = seed;
    inst.size = resolve_size(kind, size);
    std::string material = std::to_string(seed) + "|";
    for (const auto& [k, v] : inst.size)
        material += k + "=" + std::to_string(v) + ";";
    Rng rng(derive_seed(fnv1a64(to_string(kind)), seed));
    inst.payload = draw_payload(kind, inst.size, rng);
    inst.instance_id = make_id(kind, material);
    return inst;
}

TaskInstance make_instance(TaskKind kind, Payload payload) {
    if (payload.index() != static_cast<std::size_t>(kind))
        fail(ErrorCode::KindMismatch, "payload does not match " + std::string(to_string(kind)));
    validate_payload(kind, payload);
    TaskInstance inst;
    inst.kind = kind;
    inst.seed = 0;
    inst.size = derived_size(payload);
    inst.payload = std::move(payload);
    inst.explicit_payload = true;
    inst.instance_id = make_id(kind, "explicit|" + payload_to_json(inst.payload).dump());
    return inst;
}

std::uint64_t multinomial_count(const std::vector<int>& elements) {
    std::map<int, int> counts;
    for (int e : elements)
        ++counts[e];
    // Product of binomials; each intermediate is an integer.
    std::uint64_t result = 1;
    std::uint64_t placed = 0;
    for (auto [value, c] : counts) {
        for (int i = 1; i <= c; ++i) {
            ++placed;
            result = result * placed / static_cast<std::uint64_t>(i);
        }
    }
    return result;
}

std::uint64_t size_bucket(const TaskInstance& instance) {
    switch (instance.kind) {
    case TaskKind::CountingElements: return instance.as<CountingPayload>().sequence.size();
    case TaskKind::SlidingWindowMax: return instance.as<SlidingWindowPayload>().values.size();
    case TaskKind::FloodFill: {
        const auto& p = instance.as<FloodFillPayload>();
        return static_cast<std::uint64_t>(p.rows()) * static_cast<std::uint64_t>(p.cols());
    }
    case TaskKind::EditDistance: {
        const auto& p = instance.as<EditDistancePayload>();
        return p.source.size() + p.target.size();
    }
    case TaskKind::HierarchicalClustering:
        return static_cast<std::uint64_t>(instance.as<ClusteringPayload>().points);
    case TaskKind::PrimeFactorization: return instance.as<FactorizationPayload>().n;
    case TaskKind::PermutationWithDuplicates:
        return multinomial_count(instance.as<PermutationPayload>().elements);
    case TaskKind::Game24: return 4;
    }
    return 0;
}

json payload_to_json(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CountingPayload>)
                return {{"sequence", p.sequence}, {"target", std::string(1, p.target)}};
            else if constexpr (std::is_same_v<T, SlidingWindowPayload>)
                return {{"values", p.values}, {"window", p.window}};
            else if constexpr (std::is_same_v<T, FloodFillPayload>)
                return {{"grid", p.grid}};
            else if constexpr (std::is_same_v<T, EditDistancePayload>)
                return {{"source", p.source}, {"target", p.target}};
            else if constexpr (std::is_same_v<T, ClusteringPayload>) {
                std::vector<std::int64_t> upper;
                for (int i = 0; i < p.points; ++i)
                    for (int j = i + 1; j < p.points; ++j)
                        upper.push_back(p.distance[i][j]);
                return {{"labels", p.labels()}, {"upper_triangle", upper}};
            } else if constexpr (std::is_same_v<T, FactorizationPayload>)
                return {{"n", p.n}};
            else if constexpr (std::is_same_v<T, PermutationPayload>)
                return {{"elements", p.elements}};
            else
                return {{"cards", p.cards}};
        },
        payload);
}

Payload payload_from_json(TaskKind kind, const json& j) {
    try {
        switch (kind) {
        case TaskKind::CountingElements: {
            CountingPayload p;
            p.sequence = j.at("sequence").get<std::string>();
            auto t = j.at("target").get<std::string>();
            if (t.size() != 1)
                fail(ErrorCode::FormatError, "target must be one character");
            p.target = t[0];
            return p;
        }
        case TaskKind::SlidingWindowMax: {
            SlidingWindowPayload p;
            p.values = j.at("values").get<std::vector<std::int64_t>>();
            p.window = j.at("window").get<std::int64_t>();
            return p;
        }
        case TaskKind::FloodFill:
            return FloodFillPayload{j.at("grid").get<std::vector<std::string>>()};
        case TaskKind::EditDistance:
            return EditDistancePayload{j.at("source").get<std::string>(),
                                       j.at("target").get<std::string>()};
        case TaskKind::HierarchicalClustering: {
            auto upper = j.at("upper_triangle").get<std::vector<std::int64_t>>();
            int n = 1;
            while (static_cast<std::size_t>(n) * (n - 1) / 2 < upper.size())
                ++n;
            if (static_cast<std::size_t>(n) * (n - 1) / 2 != upper.size())
                fail(ErrorCode::FormatError, "upper_triangle length is not n(n-1)/2");
            ClusteringPayload p;
            p.points = n;
            p.distance.assign(n, std::vector<std::int64_t>(n, 0));
            std::size_t k = 0;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) {
                    p.distance[a][b] = p.distance[b][a] = upper[k++];
                }
            return p;
        }
        case TaskKind::PrimeFactorization:
            return FactorizationPayload{j.at("n").get<std::uint64_t>()};
        case TaskKind::PermutationWithDuplicates:
            return PermutationPayload{j.at("elements").get<std::vector<int>>()};
        case TaskKind::Game24: {
            auto cards = j.at("cards").get<std::vector<int>>();
            if (cards.size() != 4)
                fail(ErrorCode::FormatError, "exactly four cards required");
            Game24Payload p;
            std::copy(cards.begin(), cards.end(), p.cards.begin());
            return p;
        }
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, std::string("payload: ") + e.what());
    }
    fail(ErrorCode::FormatError, "unknown kind");
}

json instance_to_json(const TaskInstance& instance) {
    json size = json::object();
    for (const auto& [k, v] : instance.size)
        size[k] = v;
    return {{"kind", to_string(instance.kind)},
            {"seed", instance.seed},
            {"size", size},
            {"payload", payload_to_json(instance.payload)},
            {"instance_id", instance.instance_id},
            {"explicit_payload", instance.explicit_payload}};
}

TaskInstance instance_from_json(const json& j) {
    try {
        const auto kind = parse_task_kind(j.at("kind").get<std::string>());
        auto payload = payload_from_json(kind, j.at("payload"));
        TaskInstance inst;
        if (j.value("explicit_payload", true) || !j.contains("seed")) {
            inst = make_instance(kind, payload);
        } else {
            SizeParams size;
            for (const auto& [k, v] : j.at("size").items())
                size[k] = v.get<std::int64_t>();
            inst = generate_instance(kind, size, j.at("seed").get<std::uint64_t>());
            if (payload_to_json(inst.payload) != payload_to_json(payload))
                fail(ErrorCode::FormatError,
                     "payload is not reproducible from (kind, seed, size)");
        }
        if (j.contains("instance_id") && j.at("instance_id").get<std::string>() != inst.instance_id)
            inst.instance_id = j.at("instance_id").get<std::string>();
        return inst;
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, std::string("instance: ") + e.what());
    }
}

std::string path_key(const std::vector<int>& path) {
    std::string out = "[";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(path[i]);
    }
    return out + "]";
}

namespace {

bool witness_ok(const TaskInstance& instance, const std::string& witness) {
    try {
        auto report = verify_expression_24(witness, instance.as<Game24Payload>().cards);
        return report.violations.empty() && report.value == 24;
    } catch (const Error&) {
        return false;
    }
}

} // namespace

bool answers_equal(const TaskInstance& instance, const Answer& a, const Answer& b) {
    if (a.kind != b.kind || a.kind != instance.kind)
        return false;
    switch (a.kind) {
    case TaskKind::CountingElements:
    case TaskKind::FloodFill:
    case TaskKind::EditDistance:
        return a.scalar == b.scalar;
    case TaskKind::SlidingWindowMax:
        return a.values == b.values;
    case TaskKind::PrimeFactorization: {
        auto x = a.values, y = b.values;
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        return x == y;
    }
    case TaskKind::HierarchicalClustering: {
        std::set<std::string> x{a.clusters.first, a.clusters.second};
        std::set<std::string> y{b.clusters.first, b.clusters.second};
        return x == y && a.clusters.distance == b.clusters.distance;
    }
    case TaskKind::PermutationWithDuplicates:
        return a.permutations == b.permutations;
    case TaskKind::Game24:
        if (a.game.solvable != b.game.solvable)
            return false;
        return !a.game.solvable ||
               (witness_ok(instance, a.game.witness) && witness_ok(instance, b.game.witness));
    }
    return false;
}

json answer_to_json(const Answer& answer) {
    switch (answer.kind) {
    case TaskKind::CountingElements:
    case TaskKind::FloodFill:
    case TaskKind::EditDistance:
        return {{"value", answer.scalar}};
    case TaskKind::SlidingWindowMax:
        return {{"maxima", answer.values}};
    case TaskKind::PrimeFactorization:
        return {{"factors", answer.values}};
    case TaskKind::HierarchicalClustering:
        return {{"clusters", {answer.clusters.first, answer.clusters.second}},
                {"distance", answer.clusters.distance}};
    case TaskKind::PermutationWithDuplicates: {
        json perms = json::array();
        for (const auto& p : answer.permutations)
            perms.push_back(p);
        return {{"permutations", perms}};
    }
    case TaskKind::Game24:
        return {{"solvable", answer.game.solvable}, {"witness", answer.game.witness}};
    }
    return {};
}

Answer answer_from_json(TaskKind kind, const json& j) {
    Answer a;
    a.kind = kind;
    try {
        switch (kind) {
        case TaskKind::CountingElements:
        case TaskKind::FloodFill:
        case TaskKind::EditDistance:
            a.scalar = j.at("value").get<std::int64_t>();
            break;
        case TaskKind::SlidingWindowMax:
            a.values = j.at("maxima").get<std::vector<std::int64_t>>();
            break;
        case TaskKind::PrimeFactorization:
            a.values = j.at("factors").get<std::vector<std::int64_t>>();
            break;
        case TaskKind::HierarchicalClustering: {
            auto c = j.at("clusters").get<std::vector<std::string>>();
            if (c.size() != 2)
                fail(ErrorCode::FormatError, "clusters must hold two names");
            a.clusters = {c[0], c[1], j.at("distance").get<std::int64_t>()};
            break;
        }
        case TaskKind::PermutationWithDuplicates:
            for (const auto& p : j.at("permutations"))
                a.permutations.insert(p.get<std::vector<int>>());
            break;
        case TaskKind::Game24:
            a.game.solvable = j.at("solvable").get<bool>();
            a.game.witness = j.value("witness", std::string());
            break;
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, std::string("answer: ") + e.what());
    }
    return a;
}

} // namespace tracewise
