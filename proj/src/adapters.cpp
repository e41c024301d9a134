#include "tracewise/adapters.hpp"

#include "tracewise/error.hpp"
#include "tracewise/expression.hpp"
#include "tracewise/solvers.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_set>

namespace tracewise {

namespace {

const StateRef kEnd{"END"};

bool is_end(const StateRef& s) { return s.key == "END"; }

StateRef ref(std::string key) { return StateRef{std::move(key)}; }

std::vector<std::int64_t> numbers_in(const std::string& key) {
    std::vector<std::int64_t> out;
    std::string cur;
    bool neg = false;
    auto flush = [&] {
        if (!cur.empty())
            out.push_back((neg ? -1 : 1) * std::stoll(cur));
        cur.clear();
        neg = false;
    };
    for (char c : key) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            cur += c;
        } else {
            flush();
            neg = c == '-';
        }
    }
    flush();
    return out;
}

AbstractProblem counting(const CountingPayload& p) {
    auto seq = std::make_shared<std::string>(p.sequence);
    const char target = p.target;
    AbstractProblem a;
    a.initial = ref("-1:0");
    a.is_goal = is_end;
    a.successors = [seq, target](const StateRef& s) -> std::vector<StateRef> {
        if (is_end(s))
            return {};
        auto v = numbers_in(s.key);
        if (v.size() != 2)
            return {};
        const auto next = v[0] + 1;
        if (next < 0)
            return {};
        if (next >= static_cast<std::int64_t>(seq->size()))
            return {kEnd};
        const auto c = v[1] + ((*seq)[static_cast<std::size_t>(next)] == target);
        return {ref(std::to_string(next) + ":" + std::to_string(c))};
    };
    return a;
}

AbstractProblem sliding(const SlidingWindowPayload& p) {
    auto maxima = std::make_shared<std::vector<std::int64_t>>();
    for (std::size_t l = 0; l + p.window <= p.values.size(); ++l)
        maxima->push_back(*std::max_element(p.values.begin() + static_cast<std::ptrdiff_t>(l),
                                            p.values.begin() + static_cast<std::ptrdiff_t>(l + p.window)));
    const auto k = p.window;
    auto window = [maxima, k](std::int64_t l) {
        return ref(std::to_string(l) + "," + std::to_string(l + k) + "=" +
                   std::to_string((*maxima)[static_cast<std::size_t>(l)]));
    };
    AbstractProblem a;
    a.initial = ref("start");
    a.is_goal = is_end;
    a.successors = [maxima, window](const StateRef& s) -> std::vector<StateRef> {
        if (is_end(s))
            return {};
        std::int64_t next = 0;
        if (s.key != "start") {
            auto v = numbers_in(s.key);
            if (v.empty())
                return {};
            next = v[0] + 1;
        }
        if (next < 0)
            return {};
        if (next >= static_cast<std::int64_t>(maxima->size()))
            return {kEnd};
        return {window(next)};
    };
    return a;
}

struct FloodKey {
    std::string bitmap;
    std::int64_t id = 0;
    int r = -1, c = -1;
};

FloodKey parse_flood_key(const std::string& key) {
    FloodKey k;
    auto bar1 = key.find('|');
    auto bar2 = key.find('|', bar1 + 1);
    if (bar1 == std::string::npos || bar2 == std::string::npos)
        return k;
    k.bitmap = key.substr(0, bar1);
    k.id = std::stoll(key.substr(bar1 + 1, bar2 - bar1 - 1));
    auto v = numbers_in(key.substr(bar2 + 1));
    if (v.size() == 2) {
        k.r = static_cast<int>(v[0]);
        k.c = static_cast<int>(v[1]);
    }
    return k;
}

AbstractProblem flood(const FloodFillPayload& p) {
    struct Shared {
        int rows, cols;
        std::vector<int> comp; // component index per cell, -1 for water
        std::vector<std::vector<int>> cells;
    };
    auto sh = std::make_shared<Shared>();
    sh->rows = p.rows();
    sh->cols = p.cols();
    sh->comp.assign(static_cast<std::size_t>(sh->rows * sh->cols), -1);
    auto comps = flood_components(p);
    for (std::size_t i = 0; i < comps.size(); ++i) {
        std::vector<int> flat;
        for (auto [r, c] : comps[i]) {
            sh->comp[static_cast<std::size_t>(r * sh->cols + c)] = static_cast<int>(i);
            flat.push_back(r * sh->cols + c);
        }
        std::sort(flat.begin(), flat.end());
        sh->cells.push_back(flat);
    }
    auto make_key = [sh](const std::string& bitmap, std::int64_t id, int cell) {
        return ref(bitmap + "|" + std::to_string(id) + "|" + std::to_string(cell / sh->cols) + "," +
                   std::to_string(cell % sh->cols));
    };
    AbstractProblem a;
    a.initial = ref(std::string(static_cast<std::size_t>(sh->rows * sh->cols), '0') + "|0|-");
    a.is_goal = is_end;
    a.successors = [sh, make_key](const StateRef& s) -> std::vector<StateRef> {
        if (is_end(s))
            return {};
        auto k = parse_flood_key(s.key);
        if (k.bitmap.size() != sh->comp.size())
            return {};
        std::vector<StateRef> out;
        auto visit = [&](int cell, std::int64_t id) {
            auto bm = k.bitmap;
            bm[static_cast<std::size_t>(cell)] = '1';
            out.push_back(make_key(bm, id, cell));
        };
        if (k.r >= sh->rows || k.c >= sh->cols || k.c < -1)
            return {};
        if (k.r >= 0 && k.c >= 0) {
            const int cur = sh->comp[static_cast<std::size_t>(k.r * sh->cols + k.c)];
            if (cur >= 0)
                for (int cell : sh->cells[static_cast<std::size_t>(cur)])
                    if (k.bitmap[static_cast<std::size_t>(cell)] == '0')
                        visit(cell, k.id);
            if (!out.empty())
                return out;
        }
        for (std::size_t cell = 0; cell < sh->comp.size(); ++cell)
            if (sh->comp[cell] >= 0 && k.bitmap[cell] == '0')
                visit(static_cast<int>(cell), k.id + 1);
        if (out.empty())
            out.push_back(kEnd);
        return out;
    };
    return a;
}

AbstractProblem edit(const EditDistancePayload& p) {
    const auto la = static_cast<std::int64_t>(p.source.size());
    const auto lb = static_cast<std::int64_t>(p.target.size());
    auto dp = std::make_shared<std::vector<std::vector<std::int64_t>>>(
        la + 1, std::vector<std::int64_t>(static_cast<std::size_t>(lb + 1), 0));
    for (std::int64_t i = 0; i <= la; ++i)
        for (std::int64_t j = 0; j <= lb; ++j)
            (*dp)[i][j] = i == 0   ? j
                          : j == 0 ? i
                                   : std::min({(*dp)[i - 1][j] + 1, (*dp)[i][j - 1] + 1,
                                               (*dp)[i - 1][j - 1] +
                                                   (p.source[i - 1] != p.target[j - 1])});
    auto cell = [dp](std::int64_t i, std::int64_t j) {
        return ref(std::to_string(i) + "," + std::to_string(j) + "=" + std::to_string((*dp)[i][j]));
    };
    AbstractProblem a;
    a.initial = ref("start");
    a.is_goal = is_end;
    a.successors = [la, lb, cell](const StateRef& s) -> std::vector<StateRef> {
        if (is_end(s))
            return {};
        if (s.key == "start")
            return {cell(0, 0)};
        auto v = numbers_in(s.key);
        if (v.size() != 3 || v[0] < 0 || v[0] > la || v[1] < 0 || v[1] > lb)
            return {};
        auto i = v[0], j = v[1] + 1;
        if (j > lb) {
            ++i;
            j = 0;
        }
        if (i > la)
            return {kEnd};
        return {cell(i, j)};
    };
    return a;
}

std::vector<std::string> split_partition(const std::string& key) {
    std::vector<std::string> out;
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, '|'))
        out.push_back(item);
    return out;
}

std::string join_partition(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i)
        out += (i ? "|" : "") + names[i];
    return out;
}

AbstractProblem clustering(const ClusteringPayload& p) {
    auto payload = std::make_shared<ClusteringPayload>(p);
    std::vector<std::string> singles;
    for (char c : p.labels())
        singles.emplace_back(1, c);
    AbstractProblem a;
    a.initial = ref(join_partition(singles));
    a.is_goal = [](const StateRef& s) { return split_partition(s.key).size() == 2; };
    a.successors = [payload](const StateRef& s) -> std::vector<StateRef> {
        auto part = split_partition(s.key);
        if (part.size() <= 2)
            return {};
        for (const auto& name : part)
            for (char c : name)
                if (c < 'A' || c - 'A' >= payload->points)
                    return {};
        std::int64_t best = INT64_MAX;
        for (std::size_t i = 0; i < part.size(); ++i)
            for (std::size_t j = i + 1; j < part.size(); ++j)
                best = std::min(best, single_link(*payload, part[i], part[j]));
        std::vector<StateRef> out;
        for (std::size_t i = 0; i < part.size(); ++i)
            for (std::size_t j = i + 1; j < part.size(); ++j) {
                if (single_link(*payload, part[i], part[j]) != best)
                    continue;
                auto merged = part[i] + part[j];
                std::sort(merged.begin(), merged.end());
                std::vector<std::string> next;
                for (std::size_t k = 0; k < part.size(); ++k)
                    if (k != i && k != j)
                        next.push_back(part[k]);
                next.push_back(merged);
                out.push_back(ref(join_partition(next)));
            }
        return out;
    };
    return a;
}

std::string attempt_key(std::uint64_t r, std::uint64_t p) {
    return "A " + std::to_string(r) + " " + std::to_string(p) + (r % p == 0 ? " True" : " False");
}

AbstractProblem factorization(const FactorizationPayload& p) {
    AbstractProblem a;
    a.initial = ref("S " + std::to_string(p.n) + " 2");
    a.is_goal = is_end;
    a.successors = [](const StateRef& s) -> std::vector<StateRef> {
        if (is_end(s))
            return {};
        auto v = numbers_in(s.key);
        if (v.size() != 2 || v[0] < 1 || v[1] < 2)
            return {};
        const auto r = static_cast<std::uint64_t>(v[0]);
        const auto q = static_cast<std::uint64_t>(v[1]);
        if (s.key[0] == 'S')
            return {r == 1 ? kEnd : ref(attempt_key(r, q))};
        if (s.key.size() > 5 && s.key.compare(s.key.size() - 4, 4, "True") == 0)
            return {ref("S " + std::to_string(r / q) + " " + std::to_string(q))};
        return {ref(attempt_key(r, next_prime(q)))};
    };
    return a;
}

AbstractProblem permutation(const PermutationPayload& p) {
    auto sorted = std::make_shared<std::vector<int>>(p.elements);
    std::sort(sorted->begin(), sorted->end());
    AbstractProblem a;
    a.initial = ref("[]");
    a.is_goal = [sorted](const StateRef& s) {
        auto v = numbers_in(s.key);
        if (v.size() != sorted->size())
            return false;
        std::sort(v.begin(), v.end());
        return std::equal(v.begin(), v.end(), sorted->begin());
    };
    a.successors = [sorted](const StateRef& s) -> std::vector<StateRef> {
        auto v = numbers_in(s.key);
        std::vector<int> path(v.begin(), v.end());
        std::vector<StateRef> out;
        for (const auto& child : permutation_children(*sorted, path))
            out.push_back(ref(path_key(child)));
        if (!path.empty()) {
            path.pop_back();
            out.push_back(ref(path_key(path)));
        }
        return out;
    };
    return a;
}

std::string game24_key(const std::string& text) {
    try {
        return canonical_form(*parse_expression(text));
    } catch (const Error&) {
        return "invalid:" + strip_whitespace(text);
    }
}

AbstractProblem game24(const Game24Payload& p) {
    auto keys = std::make_shared<std::vector<StateRef>>();
    auto lookup = std::make_shared<std::unordered_set<std::string>>();
    auto goals = std::make_shared<std::unordered_set<std::string>>();
    for (const auto& c : game24_candidates(p.cards)) {
        keys->push_back(ref(c.canonical));
        lookup->insert(c.canonical);
        if (c.value == 24)
            goals->insert(c.canonical);
    }
    AbstractProblem a;
    a.initial = ref("start");
    a.is_goal = [goals](const StateRef& s) { return goals->count(s.key) > 0; };
    a.successors = [keys](const StateRef&) { return *keys; };
    a.is_successor = [lookup](const StateRef&, const StateRef& to) { return lookup->count(to.key) > 0; };
    return a;
}

} // namespace

AbstractProblem adapt_to_abstract(const TaskInstance& instance) {
    switch (instance.kind) {
    case TaskKind::CountingElements: return counting(instance.as<CountingPayload>());
    case TaskKind::SlidingWindowMax: return sliding(instance.as<SlidingWindowPayload>());
    case TaskKind::FloodFill: return flood(instance.as<FloodFillPayload>());
    case TaskKind::EditDistance: return edit(instance.as<EditDistancePayload>());
    case TaskKind::HierarchicalClustering: return clustering(instance.as<ClusteringPayload>());
    case TaskKind::PrimeFactorization: return factorization(instance.as<FactorizationPayload>());
    case TaskKind::PermutationWithDuplicates: return permutation(instance.as<PermutationPayload>());
    case TaskKind::Game24: return game24(instance.as<Game24Payload>());
    }
    return {};
}

namespace {

std::string atom_ints(const Atom& a, const char* sep) {
    std::string out;
    const auto& items = a.kind == AtomKind::List ? a.items : std::vector<Atom>{a};
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? sep : "") + items[i].text;
    return out;
}

std::string result_text(const Directive& d) { return d.result ? d.result->text : "?"; }

} // namespace

std::vector<StateRef> trace_to_steps(const TaskInstance& instance, const std::vector<Directive>& directives) {
    auto problem = adapt_to_abstract(instance);
    std::vector<StateRef> steps{problem.initial};
    const auto kind = instance.kind;

    // Flood fill keys accumulate the visited bitmap.
    std::string bitmap;
    int cols = 0;
    if (kind == TaskKind::FloodFill) {
        const auto& p = instance.as<FloodFillPayload>();
        cols = p.cols();
        bitmap.assign(static_cast<std::size_t>(p.rows() * p.cols()), '0');
    }
    std::vector<std::string> partition = split_partition(problem.initial.key);
    std::uint64_t last_prime = 2;

    for (const auto& d : directives) {
        if (d.type == DirectiveType::End) {
            if (kind != TaskKind::HierarchicalClustering && kind != TaskKind::PermutationWithDuplicates &&
                kind != TaskKind::Game24)
                steps.push_back(kEnd);
            continue;
        }
        switch (kind) {
        case TaskKind::CountingElements:
            if (d.type == DirectiveType::Check)
                steps.push_back(ref(d.args[0].text + ":" + result_text(d)));
            break;
        case TaskKind::SlidingWindowMax:
            if (d.type == DirectiveType::Check)
                steps.push_back(ref(d.args[0].text + "," + d.args[1].text + "=" + result_text(d)));
            break;
        case TaskKind::EditDistance:
            if (d.type == DirectiveType::Check)
                steps.push_back(ref(d.args[0].text + "," + d.args[1].text + "=" + result_text(d)));
            break;
        case TaskKind::FloodFill: {
            if (d.type != DirectiveType::Visit)
                break;
            const auto r = d.args[0].as_int(), c = d.args[1].as_int();
            const auto& p = instance.as<FloodFillPayload>();
            if (r >= 0 && c >= 0 && r < p.rows() && c < p.cols())
                bitmap[static_cast<std::size_t>(r * cols + c)] = '1';
            steps.push_back(ref(bitmap + "|" + result_text(d) + "|" + d.args[0].text + "," + d.args[1].text));
            break;
        }
        case TaskKind::HierarchicalClustering: {
            if (d.type != DirectiveType::Merge || !d.result)
                break;
            const auto& outcome = d.result->items;
            std::vector<std::string> next;
            if (outcome.size() >= 2) {
                for (const auto& item : outcome)
                    next.push_back(item.text);
            } else {
                for (const auto& name : partition)
                    if (name != d.args[0].text && name != d.args[1].text)
                        next.push_back(name);
                for (const auto& item : outcome)
                    next.push_back(item.text);
            }
            for (auto& name : next)
                std::sort(name.begin(), name.end());
            partition = next;
            steps.push_back(ref(join_partition(next)));
            break;
        }
        case TaskKind::PrimeFactorization:
            if (d.type == DirectiveType::State) {
                steps.push_back(ref("S " + d.args[0].text + " " + std::to_string(last_prime)));
            } else if (d.type == DirectiveType::Attempt) {
                last_prime = static_cast<std::uint64_t>(std::max<std::int64_t>(2, d.args[1].as_int()));
                steps.push_back(ref("A " + d.args[0].text + " " + d.args[1].text + " " + result_text(d)));
            }
            break;
        case TaskKind::PermutationWithDuplicates:
            if (d.type == DirectiveType::Check || d.type == DirectiveType::Backtrack)
                steps.push_back(ref("[" + atom_ints(d.args[0], ",") + "]"));
            break;
        case TaskKind::Game24:
            if (d.type == DirectiveType::Attempt)
                steps.push_back(ref(game24_key(d.args[0].text)));
            break;
        }
    }
    // A leading directive that restates the initial state is not a move.
    if (steps.size() > 1 && steps[1] == steps[0])
        steps.erase(steps.begin() + 1);
    return steps;
}

} // namespace tracewise
