#include "tracewise/solvers.hpp"

#include "tracewise/error.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

namespace tracewise {

namespace {

using D = DirectiveType;

Directive make(D type, std::vector<Atom> args, std::optional<Atom> result = std::nullopt) {
    Directive d;
    d.type = type;
    d.args = std::move(args);
    d.result = std::move(result);
    return d;
}

Atom int_list_atom(const std::vector<int>& v) {
    std::vector<std::int64_t> w(v.begin(), v.end());
    return Atom::int_list(w);
}

Atom cluster_name(const std::string& letters) { return Atom::name(letters); }

} // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2)
        return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0)
            return false;
    return true;
}

std::uint64_t next_prime(std::uint64_t p) {
    std::uint64_t q = p + 1;
    while (!is_prime(q))
        ++q;
    return q;
}

std::vector<std::vector<std::pair<int, int>>> flood_components(const FloodFillPayload& p) {
    const int rows = p.rows(), cols = p.cols();
    std::vector<std::vector<char>> seen(rows, std::vector<char>(cols, 0));
    std::vector<std::vector<std::pair<int, int>>> out;
    static const int dr[4] = {-1, 1, 0, 0};
    static const int dc[4] = {0, 0, -1, 1};
    struct Frame {
        int r, c, next;
    };
    for (int r0 = 0; r0 < rows; ++r0)
        for (int c0 = 0; c0 < cols; ++c0) {
            if (!p.land(r0, c0) || seen[r0][c0])
                continue;
            std::vector<std::pair<int, int>> cells;
            std::vector<Frame> stack{{r0, c0, 0}};
            seen[r0][c0] = 1;
            cells.emplace_back(r0, c0);
            while (!stack.empty()) {
                auto& f = stack.back();
                if (f.next == 4) {
                    stack.pop_back();
                    continue;
                }
                const int nr = f.r + dr[f.next], nc = f.c + dc[f.next];
                ++f.next;
                if (nr < 0 || nc < 0 || nr >= rows || nc >= cols || !p.land(nr, nc) || seen[nr][nc])
                    continue;
                seen[nr][nc] = 1;
                cells.emplace_back(nr, nc);
                stack.push_back({nr, nc, 0});
            }
            out.push_back(std::move(cells));
        }
    return out;
}

std::int64_t single_link(const ClusteringPayload& p, const std::string& a, const std::string& b) {
    std::int64_t best = INT64_MAX;
    for (char x : a)
        for (char y : b)
            best = std::min(best, p.distance[x - 'A'][y - 'A']);
    return best;
}

std::vector<std::vector<int>> unique_permutations(std::vector<int> elements) {
    std::sort(elements.begin(), elements.end());
    std::vector<std::vector<int>> out;
    do {
        out.push_back(elements);
    } while (std::next_permutation(elements.begin(), elements.end()));
    return out;
}

std::vector<std::vector<int>> permutation_children(const std::vector<int>& sorted_elements,
                                                   const std::vector<int>& path) {
    std::map<int, int> remaining;
    for (int e : sorted_elements)
        ++remaining[e];
    for (int e : path)
        if (--remaining[e] < 0)
            return {};
    std::vector<std::vector<int>> out;
    for (auto [value, count] : remaining)
        if (count > 0) {
            auto child = path;
            child.push_back(value);
            out.push_back(std::move(child));
        }
    return out;
}

namespace {

// Five binary tree shapes over four leaves.
ExprPtr shape(int s, const std::array<ExprPtr, 4>& x, const std::array<Expr::Op, 3>& o) {
    auto B = [](Expr::Op op, ExprPtr l, ExprPtr r) { return Expr::binary(op, l, r); };
    switch (s) {
    case 0: return B(o[2], B(o[1], B(o[0], x[0], x[1]), x[2]), x[3]);
    case 1: return B(o[2], B(o[0], x[0], B(o[1], x[1], x[2])), x[3]);
    case 2: return B(o[1], B(o[0], x[0], x[1]), B(o[2], x[2], x[3]));
    case 3: return B(o[0], x[0], B(o[2], B(o[1], x[1], x[2]), x[3]));
    default: return B(o[0], x[0], B(o[1], x[1], B(o[2], x[2], x[3])));
    }
}

std::vector<Game24Candidate> enumerate_candidates(std::array<int, 4> cards) {
    static const Expr::Op ops[4] = {Expr::Op::Add, Expr::Op::Sub, Expr::Op::Mul, Expr::Op::Div};
    std::sort(cards.begin(), cards.end());
    std::vector<Game24Candidate> out;
    std::set<std::string> seen;
    do {
        std::array<ExprPtr, 4> leaves;
        for (int i = 0; i < 4; ++i)
            leaves[i] = Expr::number(Rational(cards[i]), std::to_string(cards[i]));
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int s = 0; s < 5; ++s) {
                        auto e = shape(s, leaves, {ops[a], ops[b], ops[c]});
                        Rational v;
                        if (!try_evaluate(*e, v))
                            continue;
                        auto key = canonical_form(*e);
                        if (!seen.insert(key).second)
                            continue;
                        out.push_back({e, render(*e), std::move(key), v});
                    }
    } while (std::next_permutation(cards.begin(), cards.end()));
    return out;
}

// Pairwise exact combination; used for solvability and by the oracle.
void combine24(std::vector<std::pair<Rational, std::string>>& items, std::set<std::string>* found,
               bool& any) {
    if (items.size() == 1) {
        if (items[0].first == 24) {
            any = true;
            if (found)
                found->insert(items[0].second);
        }
        return;
    }
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = 0; j < items.size(); ++j) {
            if (i == j)
                continue;
            std::vector<std::pair<Rational, std::string>> rest;
            for (std::size_t k = 0; k < items.size(); ++k)
                if (k != i && k != j)
                    rest.push_back(items[k]);
            const auto& [a, ta] = items[i];
            const auto& [b, tb] = items[j];
            std::vector<std::pair<Rational, std::string>> next;
            if (i < j) {
                next.emplace_back(a + b, "(" + ta + "+" + tb + ")");
                next.emplace_back(a * b, "(" + ta + "*" + tb + ")");
            }
            next.emplace_back(a - b, "(" + ta + "-" + tb + ")");
            if (b != 0)
                next.emplace_back(a / b, "(" + ta + "/" + tb + ")");
            for (auto& n : next) {
                rest.push_back(n);
                combine24(rest, found, any);
                rest.pop_back();
                if (any && !found)
                    return;
            }
        }
}

std::set<std::string> oracle24(const std::array<int, 4>& cards, bool all) {
    std::vector<std::pair<Rational, std::string>> items;
    for (int c : cards)
        items.emplace_back(Rational(c), std::to_string(c));
    std::set<std::string> found;
    bool any = false;
    combine24(items, all ? &found : nullptr, any);
    if (!all && any)
        found.insert("");
    return found;
}

} // namespace

const std::vector<Game24Candidate>& game24_candidates(const std::array<int, 4>& cards) {
    static std::mutex mu;
    static std::map<std::array<int, 4>, std::vector<Game24Candidate>> cache;
    auto key = cards;
    std::sort(key.begin(), key.end());
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, enumerate_candidates(key)).first;
    return it->second;
}

bool game24_solvable(const std::array<int, 4>& cards) { return !oracle24(cards, false).empty(); }

namespace {

ReferenceSolution solve_counting(const CountingPayload& p) {
    ReferenceSolution s;
    std::int64_t count = 0;
    for (std::size_t i = 0; i < p.sequence.size(); ++i) {
        if (p.sequence[i] == p.target)
            ++count;
        s.directives.push_back(make(D::Check, {Atom::integer(static_cast<std::int64_t>(i))},
                                    Atom::integer(count)));
    }
    s.directives.push_back(make(D::End, {}, Atom::integer(count)));
    s.final_answer.scalar = count;
    s.solver_name = "linear_scan";
    return s;
}

ReferenceSolution solve_sliding(const SlidingWindowPayload& p) {
    ReferenceSolution s;
    const auto n = static_cast<std::int64_t>(p.values.size());
    std::deque<std::int64_t> dq;
    std::vector<std::int64_t> maxima;
    for (std::int64_t i = 0; i < n; ++i) {
        while (!dq.empty() && p.values[dq.back()] <= p.values[i])
            dq.pop_back();
        dq.push_back(i);
        if (dq.front() <= i - p.window)
            dq.pop_front();
        if (i >= p.window - 1) {
            const auto v = p.values[dq.front()];
            maxima.push_back(v);
            s.directives.push_back(make(D::Check,
                                        {Atom::integer(i - p.window + 1), Atom::integer(i + 1)},
                                        Atom::integer(v)));
        }
    }
    s.directives.push_back(make(D::End, {}, Atom::int_list(maxima)));
    s.final_answer.values = maxima;
    s.solver_name = "monotonic_deque";
    return s;
}

ReferenceSolution solve_flood(const FloodFillPayload& p) {
    ReferenceSolution s;
    auto comps = flood_components(p);
    for (std::size_t id = 0; id < comps.size(); ++id)
        for (auto [r, c] : comps[id])
            s.directives.push_back(make(D::Visit, {Atom::integer(r), Atom::integer(c)},
                                        Atom::integer(static_cast<std::int64_t>(id + 1))));
    const auto count = static_cast<std::int64_t>(comps.size());
    s.directives.push_back(make(D::End, {}, Atom::integer(count)));
    s.final_answer.scalar = count;
    s.solver_name = "dfs_flood_fill";
    return s;
}

ReferenceSolution solve_edit(const EditDistancePayload& p) {
    ReferenceSolution s;
    const std::size_t la = p.source.size(), lb = p.target.size();
    std::vector<std::vector<std::int64_t>> dp(la + 1, std::vector<std::int64_t>(lb + 1, 0));
    for (std::size_t i = 0; i <= la; ++i)
        for (std::size_t j = 0; j <= lb; ++j) {
            if (i == 0)
                dp[i][j] = static_cast<std::int64_t>(j);
            else if (j == 0)
                dp[i][j] = static_cast<std::int64_t>(i);
            else
                dp[i][j] = std::min({dp[i - 1][j] + 1, dp[i][j - 1] + 1,
                                     dp[i - 1][j - 1] + (p.source[i - 1] != p.target[j - 1])});
            s.directives.push_back(make(D::Check,
                                        {Atom::integer(static_cast<std::int64_t>(i)),
                                         Atom::integer(static_cast<std::int64_t>(j))},
                                        Atom::integer(dp[i][j])));
        }
    s.directives.push_back(make(D::End, {}, Atom::integer(dp[la][lb])));
    s.final_answer.scalar = dp[la][lb];
    s.solver_name = "dp_table";
    return s;
}

Atom partition_atom(const std::vector<std::string>& part) {
    std::vector<Atom> items;
    for (const auto& c : part)
        items.push_back(cluster_name(c));
    return Atom::name_set(std::move(items));
}

ReferenceSolution solve_clustering(const ClusteringPayload& p) {
    ReferenceSolution s;
    std::vector<std::string> part;
    for (char c : p.labels())
        part.emplace_back(1, c);
    while (part.size() > 2) {
        std::sort(part.begin(), part.end());
        std::size_t bi = 0, bj = 1;
        std::int64_t best = INT64_MAX;
        for (std::size_t i = 0; i < part.size(); ++i)
            for (std::size_t j = i + 1; j < part.size(); ++j) {
                const auto d = single_link(p, part[i], part[j]);
                s.directives.push_back(
                    make(D::Check, {cluster_name(part[i]), cluster_name(part[j])}, Atom::integer(d)));
                // Strict comparison keeps the lexicographically first pair on ties.
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        std::string merged = part[bi] + part[bj];
        std::sort(merged.begin(), merged.end());
        const auto u = part[bi], v = part[bj];
        part.erase(part.begin() + static_cast<std::ptrdiff_t>(bj));
        part.erase(part.begin() + static_cast<std::ptrdiff_t>(bi));
        part.push_back(merged);
        std::sort(part.begin(), part.end());
        s.directives.push_back(make(D::Merge, {cluster_name(u), cluster_name(v)}, partition_atom(part)));
    }
    std::sort(part.begin(), part.end());
    const auto d = single_link(p, part[0], part[1]);
    s.directives.push_back(make(D::End, {},
                                Atom::name_set({cluster_name(part[0]), cluster_name(part[1]),
                                                Atom::integer(d)})));
    s.final_answer.clusters = {part[0], part[1], d};
    s.solver_name = "agnes_single_linkage";
    return s;
}

ReferenceSolution solve_factorization(const FactorizationPayload& p) {
    ReferenceSolution s;
    auto I = [](std::uint64_t v) { return Atom::integer(static_cast<std::int64_t>(v)); };
    std::uint64_t r = p.n, q = 2;
    std::vector<std::int64_t> factors;
    s.directives.push_back(make(D::State, {I(r)}));
    while (r > 1) {
        const bool divides = r % q == 0;
        s.directives.push_back(make(D::Attempt, {I(r), I(q)}, Atom::keyword(divides ? "True" : "False")));
        if (divides) {
            r /= q;
            factors.push_back(static_cast<std::int64_t>(q));
            s.directives.push_back(make(D::State, {I(r)}));
        } else {
            q = next_prime(q);
        }
    }
    s.directives.push_back(make(D::End, {}, Atom::int_list(factors)));
    s.final_answer.values = factors;
    s.solver_name = "trial_division";
    return s;
}

ReferenceSolution solve_permutation(const PermutationPayload& p) {
    ReferenceSolution s;
    auto sorted = p.elements;
    std::sort(sorted.begin(), sorted.end());
    std::function<void(const std::vector<int>&)> dfs = [&](const std::vector<int>& path) {
        const bool done = path.size() == sorted.size();
        s.directives.push_back(
            make(D::Check, {int_list_atom(path)}, Atom::keyword(done ? "done" : "continue")));
        if (done) {
            s.final_answer.permutations.insert(path);
            return;
        }
        for (const auto& child : permutation_children(sorted, path)) {
            dfs(child);
            s.directives.push_back(make(D::Backtrack, {int_list_atom(path)}));
        }
    };
    dfs({});
    s.directives.push_back(make(D::End, {}));
    s.solver_name = "backtracking_dedup";
    return s;
}

ReferenceSolution solve_game24(const Game24Payload& p) {
    ReferenceSolution s;
    for (const auto& c : game24_candidates(p.cards)) {
        auto value = format_rational(c.value);
        Atom result = value.find('.') == std::string::npos ? Atom{AtomKind::Integer, value, {}}
                                                           : Atom::decimal(value);
        s.directives.push_back(make(D::Attempt, {Atom::expression(c.text)}, result));
        if (c.value == 24) {
            s.directives.push_back(make(D::End, {}, Atom::expression("(" + c.text + ")")));
            s.final_answer.game = {true, c.text};
            s.solver_name = "exhaustive_enumeration";
            return s;
        }
    }
    fail(ErrorCode::NoSolution, "no expression over the cards reaches 24");
}

} // namespace

ReferenceSolution canonical_trace(const TaskInstance& instance) {
    ReferenceSolution s;
    switch (instance.kind) {
    case TaskKind::CountingElements: s = solve_counting(instance.as<CountingPayload>()); break;
    case TaskKind::SlidingWindowMax: s = solve_sliding(instance.as<SlidingWindowPayload>()); break;
    case TaskKind::FloodFill: s = solve_flood(instance.as<FloodFillPayload>()); break;
    case TaskKind::EditDistance: s = solve_edit(instance.as<EditDistancePayload>()); break;
    case TaskKind::HierarchicalClustering:
        s = solve_clustering(instance.as<ClusteringPayload>());
        break;
    case TaskKind::PrimeFactorization:
        s = solve_factorization(instance.as<FactorizationPayload>());
        break;
    case TaskKind::PermutationWithDuplicates:
        s = solve_permutation(instance.as<PermutationPayload>());
        break;
    case TaskKind::Game24: s = solve_game24(instance.as<Game24Payload>()); break;
    }
    s.final_answer.kind = instance.kind;
    s.canonical_trace = serialize_directives(s.directives);
    s.goal_states = goal_state_set(instance);
    return s;
}

Answer reference_answer(const TaskInstance& instance) { return canonical_trace(instance).final_answer; }

namespace {

constexpr std::size_t kEditOracleCap = 16;
constexpr std::size_t kPermutationOracleCap = 9;
constexpr int kFloodOracleCap = 60;
constexpr int kClusterOracleCap = 26;

std::int64_t edit_recursive(const std::string& a, const std::string& b, std::size_t i, std::size_t j) {
    if (i == a.size())
        return static_cast<std::int64_t>(b.size() - j);
    if (j == b.size())
        return static_cast<std::int64_t>(a.size() - i);
    if (a[i] == b[j])
        return edit_recursive(a, b, i + 1, j + 1);
    return 1 + std::min({edit_recursive(a, b, i + 1, j), edit_recursive(a, b, i, j + 1),
                         edit_recursive(a, b, i + 1, j + 1)});
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e) {
        if (e & 1)
            r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

bool miller_rabin(std::uint64_t n) {
    if (n < 2)
        return false;
    for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37})
        if (n % p == 0)
            return n == p;
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        auto x = powmod(a, d, n);
        if (x == 1 || x == n - 1)
            continue;
        bool composite = true;
        for (int r = 1; r < s && composite; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1)
                composite = false;
        }
        if (composite)
            return false;
    }
    return true;
}

std::uint64_t pollard_rho(std::uint64_t n) {
    if (n % 2 == 0)
        return 2;
    for (std::uint64_t c = 1;; ++c) {
        std::uint64_t x = 2, y = 2, d = 1;
        auto f = [&](std::uint64_t v) { return (mulmod(v, v, n) + c) % n; };
        while (d == 1) {
            x = f(x);
            y = f(f(y));
            d = std::gcd(x > y ? x - y : y - x, n);
        }
        if (d != n)
            return d;
    }
}

void factor_rho(std::uint64_t n, std::vector<std::int64_t>& out) {
    if (n == 1)
        return;
    if (miller_rabin(n)) {
        out.push_back(static_cast<std::int64_t>(n));
        return;
    }
    const auto d = pollard_rho(n);
    factor_rho(d, out);
    factor_rho(n / d, out);
}

} // namespace

Answer brute_force_oracle(const TaskInstance& instance) {
    Answer a;
    a.kind = instance.kind;
    switch (instance.kind) {
    case TaskKind::CountingElements: {
        const auto& p = instance.as<CountingPayload>();
        std::map<char, std::int64_t> histogram;
        for (char c : p.sequence)
            ++histogram[c];
        a.scalar = histogram[p.target];
        break;
    }
    case TaskKind::SlidingWindowMax: {
        const auto& p = instance.as<SlidingWindowPayload>();
        for (std::size_t l = 0; l + p.window <= p.values.size(); ++l) {
            std::int64_t best = p.values[l];
            for (std::size_t k = l; k < l + p.window; ++k)
                best = std::max(best, p.values[k]);
            a.values.push_back(best);
        }
        break;
    }
    case TaskKind::FloodFill: {
        const auto& p = instance.as<FloodFillPayload>();
        if (p.rows() > kFloodOracleCap || p.cols() > kFloodOracleCap)
            fail(ErrorCode::TooLargeForOracle, "grid beyond oracle cap");
        const int rows = p.rows(), cols = p.cols();
        UnionFind uf(rows * cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                if (!p.land(r, c))
                    continue;
                if (r + 1 < rows && p.land(r + 1, c))
                    uf.unite(r * cols + c, (r + 1) * cols + c);
                if (c + 1 < cols && p.land(r, c + 1))
                    uf.unite(r * cols + c, r * cols + c + 1);
            }
        std::set<int> roots;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (p.land(r, c))
                    roots.insert(uf.find(r * cols + c));
        a.scalar = static_cast<std::int64_t>(roots.size());
        break;
    }
    case TaskKind::EditDistance: {
        const auto& p = instance.as<EditDistancePayload>();
        if (p.source.size() + p.target.size() > kEditOracleCap)
            fail(ErrorCode::TooLargeForOracle, "strings beyond oracle cap");
        a.scalar = edit_recursive(p.source, p.target, 0, 0);
        break;
    }
    case TaskKind::HierarchicalClustering: {
        const auto& p = instance.as<ClusteringPayload>();
        if (p.points > kClusterOracleCap)
            fail(ErrorCode::TooLargeForOracle, "too many points");
        // Single linkage merges follow the minimum spanning forest edges.
        std::vector<std::tuple<std::int64_t, int, int>> edges;
        for (int i = 0; i < p.points; ++i)
            for (int j = i + 1; j < p.points; ++j)
                edges.emplace_back(p.distance[i][j], i, j);
        std::sort(edges.begin(), edges.end());
        UnionFind uf(p.points);
        int merges = 0;
        std::int64_t last = 0;
        for (auto [d, i, j] : edges) {
            if (!uf.unite(i, j))
                continue;
            if (++merges == p.points - 1) {
                last = d;
                break;
            }
            if (merges == p.points - 2) {
                std::map<int, std::string> groups;
                for (int k = 0; k < p.points; ++k)
                    groups[uf.find(k)] += static_cast<char>('A' + k);
                std::vector<std::string> names;
                for (auto& [root, name] : groups)
                    names.push_back(name);
                std::sort(names.begin(), names.end());
                a.clusters.first = names[0];
                a.clusters.second = names[1];
            }
        }
        if (p.points == 2) {
            a.clusters.first = "A";
            a.clusters.second = "B";
        }
        a.clusters.distance = last;
        break;
    }
    case TaskKind::PrimeFactorization: {
        factor_rho(instance.as<FactorizationPayload>().n, a.values);
        std::sort(a.values.begin(), a.values.end());
        break;
    }
    case TaskKind::PermutationWithDuplicates: {
        const auto& e = instance.as<PermutationPayload>().elements;
        if (e.size() > kPermutationOracleCap)
            fail(ErrorCode::TooLargeForOracle, "base length beyond oracle cap");
        std::vector<std::size_t> order(e.size());
        std::iota(order.begin(), order.end(), 0);
        do {
            std::vector<int> perm;
            for (auto i : order)
                perm.push_back(e[i]);
            a.permutations.insert(perm);
        } while (std::next_permutation(order.begin(), order.end()));
        break;
    }
    case TaskKind::Game24: {
        auto found = oracle24(instance.as<Game24Payload>().cards, true);
        a.game.solvable = !found.empty();
        if (a.game.solvable)
            a.game.witness = *found.begin();
        break;
    }
    }
    return a;
}

std::set<std::string> goal_state_set(const TaskInstance& instance) {
    constexpr std::uint64_t kEnumerationCap = 1000000;
    switch (instance.kind) {
    case TaskKind::PermutationWithDuplicates: {
        const auto& e = instance.as<PermutationPayload>().elements;
        if (multinomial_count(e) > kEnumerationCap)
            fail(ErrorCode::TooLargeForEnumeration, "more than 10^6 unique permutations");
        std::set<std::string> out;
        for (const auto& perm : unique_permutations(e))
            out.insert(path_key(perm));
        return out;
    }
    case TaskKind::Game24: {
        std::set<std::string> out;
        for (const auto& c : game24_candidates(instance.as<Game24Payload>().cards))
            if (c.value == 24)
                out.insert(c.canonical);
        return out;
    }
    default:
        return {"END"};
    }
}

} // namespace tracewise
