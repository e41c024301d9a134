#include "tracewise/audit.hpp"

#include "tracewise/adapters.hpp"
#include "tracewise/error.hpp"
#include "tracewise/expression.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace tracewise {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 10> kFindingNames = {
    "BoundaryViolation",   "ProcedureOmission", "IncorrectBacktracking", "StateRevisitation",
    "InfiniteSelfLoop",    "StateStaleness",    "ExecutionError",        "UnfaithfulConclusion",
    "WrongAnswer",         "Incomplete",
};

} // namespace

std::string_view to_string(FindingKind kind) { return kFindingNames[static_cast<std::size_t>(kind)]; }

FindingKind parse_finding_kind(std::string_view text) {
    for (std::size_t i = 0; i < kFindingNames.size(); ++i)
        if (kFindingNames[i] == text)
            return static_cast<FindingKind>(i);
    fail(ErrorCode::FormatError, "unknown finding kind '" + std::string(text) + "'");
}

bool is_taxonomy_kind(FindingKind kind) {
    return kind != FindingKind::WrongAnswer && kind != FindingKind::Incomplete;
}

bool AuditVerdict::has(FindingKind kind) const { return count(kind) > 0; }

std::size_t AuditVerdict::count(FindingKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(), [&](const Finding& f) { return f.kind == kind; }));
}

namespace {

using FK = FindingKind;
using DT = DirectiveType;

std::string ints_text(const std::vector<std::int64_t>& v) { return serialize_atom(Atom::int_list(v)); }

class Auditor {
public:
    Auditor(const TaskInstance& instance, const ReferenceSolution& reference, const ParsedTrace& trace,
            const std::optional<std::string>& thinking, const AuditOptions& options)
        : inst_(instance), ref_(reference), tr_(trace), dirs_(trace.directives), thinking_(thinking),
          opt_(options), skip_(trace.directives.size(), 0) {
        for (std::size_t i = 0; i < dirs_.size(); ++i)
            if (dirs_[i].type == DT::End)
                end_ = i;
    }

    AuditVerdict run() {
        self_loops();
        switch (inst_.kind) {
        case TaskKind::CountingElements: counting(); break;
        case TaskKind::SlidingWindowMax: sliding(); break;
        case TaskKind::FloodFill: flood(); break;
        case TaskKind::EditDistance: edit(); break;
        case TaskKind::HierarchicalClustering: clustering(); break;
        case TaskKind::PrimeFactorization: factorization(); break;
        case TaskKind::PermutationWithDuplicates: permutation(); break;
        case TaskKind::Game24: game24(); break;
        }
        thinking_checks();
        verdict_layer();
        return finish();
    }

private:
    const TaskInstance& inst_;
    const ReferenceSolution& ref_;
    const ParsedTrace& tr_;
    const std::vector<Directive>& dirs_;
    const std::optional<std::string>& thinking_;
    AuditOptions opt_;
    std::vector<char> skip_;
    std::optional<std::size_t> end_;
    std::vector<Finding> findings_;
    std::optional<std::set<std::vector<int>>> reached_; // permutation done paths
    std::optional<double> coverage_;
    std::size_t goals_total_ = 0;

    Finding& add(FK kind, std::optional<std::size_t> idx, std::string note) {
        Finding f;
        f.kind = kind;
        f.directive_index = idx;
        if (idx)
            f.span = dirs_[*idx].span;
        f.note = std::move(note);
        findings_.push_back(std::move(f));
        return findings_.back();
    }

    Finding& add(FK kind, std::size_t idx, std::string note, std::string expected, std::string observed) {
        auto& f = add(kind, std::optional<std::size_t>(idx), std::move(note));
        f.expected = std::move(expected);
        f.observed = std::move(observed);
        return f;
    }

    bool has_end() const { return end_.has_value(); }

    const Atom* end_value() const {
        if (!end_ || !dirs_[*end_].result)
            return nullptr;
        return &*dirs_[*end_].result;
    }

    // ---- shared passes -------------------------------------------------

    void self_loops() {
        std::size_t i = 0;
        while (i < dirs_.size()) {
            std::size_t j = i + 1;
            while (j < dirs_.size() && dirs_[j] == dirs_[i])
                ++j;
            const std::size_t run = j - i;
            if (run >= opt_.self_loop_run) {
                auto& f = add(FK::InfiniteSelfLoop, i + opt_.self_loop_run - 1,
                              std::to_string(run) + " consecutive identical directives");
                f.related_index = i;
                for (std::size_t k = i + 1; k < j; ++k)
                    skip_[k] = 1;
            }
            i = j;
        }
        if (tr_.truncated && !opt_.had_tags) {
            Finding f;
            f.kind = FK::InfiniteSelfLoop;
            f.channel = Channel::Raw;
            f.note = "no answer block and no END: generation ran out of budget";
            findings_.push_back(f);
        }
    }

    void thinking_checks() {
        if (!thinking_)
            return;
        // Repeated blocks, judged line by line and sentence by sentence.
        std::map<std::string, std::pair<std::size_t, std::size_t>> seen; // text -> (count, first pos)
        auto scan = [&](char sep) {
            std::size_t pos = 0;
            const auto& t = *thinking_;
            while (pos < t.size()) {
                auto next = t.find(sep, pos);
                if (next == std::string::npos)
                    next = t.size();
                std::string piece = t.substr(pos, next - pos);
                auto b = piece.find_first_not_of(" \t\r\n");
                auto e = piece.find_last_not_of(" \t\r\n");
                if (b != std::string::npos) {
                    piece = piece.substr(b, e - b + 1);
                    if (piece.size() >= opt_.thinking_block_min) {
                        auto& slot = seen[std::string(1, sep) + piece];
                        if (slot.first++ == 0)
                            slot.second = pos + b;
                    }
                }
                pos = next + 1;
            }
        };
        scan('\n');
        scan('.');
        const std::pair<const std::string, std::pair<std::size_t, std::size_t>>* worst = nullptr;
        for (const auto& entry : seen)
            if (entry.second.first >= opt_.thinking_repeats &&
                (!worst || entry.second.first > worst->second.first))
                worst = &entry;
        if (worst) {
            Finding f;
            f.kind = FK::InfiniteSelfLoop;
            f.channel = Channel::Thinking;
            f.span = Span{worst->second.second, worst->second.second + worst->first.size() - 1};
            f.note = "thinking block of " + std::to_string(worst->first.size() - 1) + " characters repeated " +
                     std::to_string(worst->second.first) + " times";
            findings_.push_back(f);
        }

        if (inst_.kind != TaskKind::Game24)
            return;
        const auto stripped = strip_whitespace(*thinking_);
        std::optional<std::size_t> witness_pos;
        if (auto* v = end_value()) {
            auto w = strip_whitespace(v->text);
            while (w.size() >= 2 && w.front() == '(' && w.back() == ')' && balanced_inner(w))
                w = w.substr(1, w.size() - 2);
            auto p = stripped.find(w);
            if (!w.empty() && p != std::string::npos)
                witness_pos = p;
        }
        for (std::size_t i = 0; i < dirs_.size(); ++i) {
            if (dirs_[i].type != DT::Attempt || skip_[i])
                continue;
            const auto expr = strip_whitespace(dirs_[i].args[0].text);
            const auto p = stripped.find(expr);
            if (p == std::string::npos) {
                add(FK::UnfaithfulConclusion, i, "attempt never appears in the thinking text");
            } else if (witness_pos && p > *witness_pos) {
                add(FK::UnfaithfulConclusion, i,
                    "attempt first appears in the thinking text after the final expression was found");
            }
        }
    }

    static bool balanced_inner(const std::string& w) {
        int depth = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            depth += w[i] == '(' ? 1 : w[i] == ')' ? -1 : 0;
            if (depth == 0 && i + 1 < w.size())
                return false;
        }
        return true;
    }

    // ---- counting ------------------------------------------------------

    void counting() {
        const auto& p = inst_.as<CountingPayload>();
        const auto n = static_cast<std::int64_t>(p.sequence.size());
        std::vector<std::int64_t> prefix(static_cast<std::size_t>(n) + 1, 0);
        for (std::int64_t i = 0; i < n; ++i)
            prefix[i + 1] = prefix[i] + (p.sequence[i] == p.target);
        std::int64_t prev_i = -1, prev_c = 0;
        std::optional<std::int64_t> last_declared;
        std::set<std::int64_t> checked;
        for (std::size_t k = 0; k < dirs_.size(); ++k) {
            const auto& d = dirs_[k];
            if (skip_[k] || d.type != DT::Check)
                continue;
            const auto i = d.args[0].as_int();
            const auto c = d.result->as_int();
            last_declared = c;
            if (i < 0 || i >= n) {
                add(FK::BoundaryViolation, k, "index " + std::to_string(i) + " outside [0, " + std::to_string(n) + ")");
                skip_[k] = 1;
                continue;
            }
            if (!checked.insert(i).second) {
                add(FK::StateRevisitation, k, "index " + std::to_string(i) + " checked again");
                continue;
            }
            std::int64_t expected;
            if (i > prev_i)
                expected = prev_c + prefix[i + 1] - prefix[prev_i + 1];
            else
                expected = prefix[i + 1];
            if (c != expected)
                add(FK::ExecutionError, k, "running count", std::to_string(expected), std::to_string(c));
            if (i > prev_i) {
                prev_i = i;
                prev_c = c;
            }
        }
        if (!has_end())
            return;
        if (auto* v = end_value(); v && last_declared && v->as_int() != *last_declared)
            add(FK::UnfaithfulConclusion, *end_, "END differs from the last declared count",
                std::to_string(*last_declared), v->text);
        std::vector<std::int64_t> missing;
        for (std::int64_t i = 0; i < n; ++i)
            if (p.sequence[i] == p.target && !checked.count(i))
                missing.push_back(i);
        if (!missing.empty())
            add(FK::ProcedureOmission, *end_, "matching indices never checked: " + ints_text(missing));
    }

    // ---- sliding window ------------------------------------------------

    void sliding() {
        const auto& p = inst_.as<SlidingWindowPayload>();
        const auto n = static_cast<std::int64_t>(p.values.size());
        const auto k = p.window;
        std::map<std::int64_t, std::int64_t> declared;
        for (std::size_t idx = 0; idx < dirs_.size(); ++idx) {
            const auto& d = dirs_[idx];
            if (skip_[idx] || d.type != DT::Check)
                continue;
            const auto L = d.args[0].as_int(), R = d.args[1].as_int();
            if (L < 0 || R > n || R - L != k) {
                add(FK::BoundaryViolation, idx,
                    "window (" + std::to_string(L) + "," + std::to_string(R) + ") is not a size-" +
                        std::to_string(k) + " window inside [0, " + std::to_string(n) + "]");
                skip_[idx] = 1;
                continue;
            }
            if (declared.count(L)) {
                add(FK::StateRevisitation, idx, "window checked again");
                continue;
            }
            const auto truth = *std::max_element(p.values.begin() + L, p.values.begin() + R);
            const auto v = d.result->as_int();
            if (v != truth)
                add(FK::ExecutionError, idx, "window maximum", std::to_string(truth), std::to_string(v));
            declared[L] = v;
        }
        if (!has_end())
            return;
        std::vector<std::int64_t> implied;
        for (auto [L, v] : declared)
            implied.push_back(v);
        if (auto* v = end_value(); v && v->as_int_list() != implied)
            add(FK::UnfaithfulConclusion, *end_, "END list differs from the checked maxima", ints_text(implied),
                v->text);
        std::vector<std::string> missing;
        for (std::int64_t L = 0; L + k <= n; ++L)
            if (!declared.count(L))
                missing.push_back("(" + std::to_string(L) + "," + std::to_string(L + k) + ")");
        if (!missing.empty()) {
            std::string list;
            for (const auto& m : missing)
                list += (list.empty() ? "" : " ") + m;
            add(FK::ProcedureOmission, *end_, "windows never checked: " + list);
        }
    }

    // ---- flood fill ----------------------------------------------------

    void flood() {
        const auto& p = inst_.as<FloodFillPayload>();
        const int rows = p.rows(), cols = p.cols();
        std::vector<int> comp(static_cast<std::size_t>(rows * cols), -1);
        auto comps = flood_components(p);
        for (std::size_t i = 0; i < comps.size(); ++i)
            for (auto [r, c] : comps[i])
                comp[static_cast<std::size_t>(r * cols + c)] = static_cast<int>(i);
        std::map<int, std::int64_t> declared_id;
        std::int64_t max_id = 0;
        std::set<std::pair<std::int64_t, std::int64_t>> visited;
        for (std::size_t idx = 0; idx < dirs_.size(); ++idx) {
            const auto& d = dirs_[idx];
            if (skip_[idx] || d.type != DT::Visit)
                continue;
            const auto r = d.args[0].as_int(), c = d.args[1].as_int();
            if (r < 0 || c < 0 || r >= rows || c >= cols) {
                add(FK::BoundaryViolation, idx, "cell off the " + std::to_string(rows) + "x" + std::to_string(cols) + " grid");
                skip_[idx] = 1;
                continue;
            }
            if (!visited.insert({r, c}).second) {
                add(FK::StateRevisitation, idx, "cell visited again");
                continue;
            }
            const auto id = d.result->as_int();
            const int cc = comp[static_cast<std::size_t>(r * cols + c)];
            if (cc < 0) {
                add(FK::ExecutionError, idx, "water cell labelled as land", "water", std::to_string(id));
                continue;
            }
            auto it = declared_id.find(cc);
            const auto expected = it != declared_id.end() ? it->second : max_id + 1;
            if (id != expected)
                add(FK::ExecutionError, idx, "island id", std::to_string(expected), std::to_string(id));
            if (it == declared_id.end()) {
                declared_id[cc] = id;
                max_id = std::max(max_id, id);
            }
        }
        if (!has_end())
            return;
        if (auto* v = end_value(); v && v->as_int() != max_id)
            add(FK::UnfaithfulConclusion, *end_, "END differs from the largest island id visited",
                std::to_string(max_id), v->text);
        std::size_t missing = 0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (p.land(r, c) && !visited.count({r, c}))
                    ++missing;
        if (missing)
            add(FK::ProcedureOmission, *end_, std::to_string(missing) + " land cells never visited");
    }

    // ---- edit distance -------------------------------------------------

    void edit() {
        const auto& p = inst_.as<EditDistancePayload>();
        const auto la = static_cast<std::int64_t>(p.source.size());
        const auto lb = static_cast<std::int64_t>(p.target.size());
        std::vector<std::vector<std::int64_t>> truth(la + 1, std::vector<std::int64_t>(lb + 1, 0));
        for (std::int64_t i = 0; i <= la; ++i)
            for (std::int64_t j = 0; j <= lb; ++j)
                truth[i][j] = i == 0   ? j
                              : j == 0 ? i
                                       : std::min({truth[i - 1][j] + 1, truth[i][j - 1] + 1,
                                                   truth[i - 1][j - 1] + (p.source[i - 1] != p.target[j - 1])});
        std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> declared;
        auto val = [&](std::int64_t i, std::int64_t j) {
            auto it = declared.find({i, j});
            return it != declared.end() ? it->second : truth[i][j];
        };
        for (std::size_t idx = 0; idx < dirs_.size(); ++idx) {
            const auto& d = dirs_[idx];
            if (skip_[idx] || d.type != DT::Check)
                continue;
            const auto i = d.args[0].as_int(), j = d.args[1].as_int();
            if (i < 0 || j < 0 || i > la || j > lb) {
                add(FK::BoundaryViolation, idx, "cell outside the (" + std::to_string(la + 1) + "x" +
                                                    std::to_string(lb + 1) + ") table");
                skip_[idx] = 1;
                continue;
            }
            if (declared.count({i, j})) {
                add(FK::StateRevisitation, idx, "cell computed again");
                continue;
            }
            std::int64_t expected;
            if (i == 0)
                expected = j;
            else if (j == 0)
                expected = i;
            else
                expected = std::min({val(i - 1, j) + 1, val(i, j - 1) + 1,
                                     val(i - 1, j - 1) + (p.source[i - 1] != p.target[j - 1])});
            const auto v = d.result->as_int();
            if (v != expected)
                add(FK::ExecutionError, idx, "cell cost from its neighbours", std::to_string(expected),
                    std::to_string(v));
            declared[{i, j}] = v;
        }
        if (!has_end())
            return;
        if (auto* v = end_value(); v && declared.count({la, lb}) && v->as_int() != declared[{la, lb}])
            add(FK::UnfaithfulConclusion, *end_, "END differs from the final cell",
                std::to_string(declared[{la, lb}]), v->text);
        const auto total = static_cast<std::size_t>((la + 1) * (lb + 1));
        if (declared.size() < total)
            add(FK::ProcedureOmission, *end_,
                std::to_string(total - declared.size()) + " table cells never computed");
    }

    // ---- clustering ----------------------------------------------------

    struct Resolved {
        std::string cluster; // true member letters, sorted
        bool ok = false;
    };

    void clustering() {
        const auto& p = inst_.as<ClusteringPayload>();
        std::set<std::string> partition;
        for (char c : p.labels())
            partition.insert(std::string(1, c));
        std::set<std::string> consumed;
        std::map<std::string, std::string> alias;
        std::set<std::pair<std::string, std::string>> round;
        std::map<std::pair<std::string, std::string>, std::int64_t> last_check;

        auto sorted = [](std::string s) {
            std::sort(s.begin(), s.end());
            return s;
        };
        auto resolve = [&](const Atom& a, std::size_t idx) -> Resolved {
            if (a.kind != AtomKind::Name) {
                add(FK::BoundaryViolation, idx, "'" + a.text + "' is not a cluster name");
                return {};
            }
            if (auto it = alias.find(a.text); it != alias.end()) {
                if (partition.count(it->second))
                    return {it->second, true};
                add(FK::StateStaleness, idx, "cluster " + a.text + " was already merged away");
                return {};
            }
            const auto s = sorted(a.text);
            if (partition.count(s))
                return {s, true};
            if (consumed.count(s)) {
                add(FK::StateStaleness, idx, "cluster " + a.text + " was already merged away");
                return {};
            }
            add(FK::BoundaryViolation, idx, "cluster " + a.text + " never existed");
            return {};
        };
        auto min_link = [&]() {
            std::int64_t best = INT64_MAX;
            for (auto i = partition.begin(); i != partition.end(); ++i)
                for (auto j = std::next(i); j != partition.end(); ++j)
                    best = std::min(best, single_link(p, *i, *j));
            return best;
        };

        for (std::size_t idx = 0; idx < dirs_.size(); ++idx) {
            const auto& d = dirs_[idx];
            if (skip_[idx])
                continue;
            if (d.type == DT::Check) {
                const std::size_t before = findings_.size();
                auto x = resolve(d.args[0], idx);
                auto y = resolve(d.args[1], idx);
                if (!x.ok || !y.ok) {
                    if (std::any_of(findings_.begin() + static_cast<std::ptrdiff_t>(before), findings_.end(),
                                    [](const Finding& f) { return f.kind == FK::BoundaryViolation; }))
                        skip_[idx] = 1;
                    continue;
                }
                if (x.cluster == y.cluster) {
                    add(FK::BoundaryViolation, idx, "cluster paired with itself");
                    skip_[idx] = 1;
                    continue;
                }
                auto key = std::minmax(x.cluster, y.cluster);
                if (!round.insert(key).second) {
                    add(FK::StateRevisitation, idx, "pair checked again in the same round");
                    continue;
                }
                const auto truth = single_link(p, x.cluster, y.cluster);
                const auto v = d.result->as_int();
                if (v != truth)
                    add(FK::ExecutionError, idx, "single-linkage distance", std::to_string(truth),
                        std::to_string(v));
                last_check[key] = v;
            } else if (d.type == DT::Merge) {
                const std::size_t before = findings_.size();
                auto u = resolve(d.args[0], idx);
                auto v = resolve(d.args[1], idx);
                if (!u.ok || !v.ok) {
                    if (std::any_of(findings_.begin() + static_cast<std::ptrdiff_t>(before), findings_.end(),
                                    [](const Finding& f) { return f.kind == FK::BoundaryViolation; }))
                        skip_[idx] = 1;
                    continue;
                }
                if (u.cluster == v.cluster) {
                    add(FK::BoundaryViolation, idx, "cluster merged with itself");
                    skip_[idx] = 1;
                    continue;
                }
                if (partition.size() <= 2) {
                    add(FK::BoundaryViolation, idx, "merge past the two-cluster stopping point");
                    skip_[idx] = 1;
                    continue;
                }
                // Every pair must be compared before merging.
                std::vector<std::string> missing;
                for (auto i = partition.begin(); i != partition.end(); ++i)
                    for (auto j = std::next(i); j != partition.end(); ++j)
                        if (!round.count({*i, *j}))
                            missing.push_back(*i + "-" + *j);
                if (!missing.empty())
                    pending_omissions_.push_back(std::to_string(missing.size()) + " pairs unchecked before MERGE #" +
                                                 std::to_string(idx));
                const auto best = min_link();
                const auto link = single_link(p, u.cluster, v.cluster);
                if (link != best)
                    add(FK::ExecutionError, idx, "merged pair is not the closest", std::to_string(best),
                        std::to_string(link));
                const auto merged = sorted(u.cluster + v.cluster);
                // Outcome: the new cluster alone, or the whole new partition.
                if (d.result) {
                    std::vector<std::string> unexplained;
                    std::set<std::string> others;
                    for (const auto& c : partition)
                        if (c != u.cluster && c != v.cluster)
                            others.insert(c);
                    std::set<std::string> listed;
                    for (const auto& item : d.result->items) {
                        if (item.kind != AtomKind::Name) {
                            unexplained.push_back(item.text);
                            continue;
                        }
                        const auto s = sorted(item.text);
                        if (d.result->items.size() > 1 && others.count(s) && !listed.count(s))
                            listed.insert(s);
                        else
                            unexplained.push_back(item.text);
                    }
                    if (d.result->items.size() > 1 && listed.size() < others.size())
                        add(FK::StateStaleness, idx, "new partition drops an untouched cluster");
                    if (unexplained.size() != 1) {
                        add(FK::ExecutionError, idx, "merge outcome does not name one new cluster", merged,
                            serialize_atom(*d.result));
                    } else {
                        const auto named = sorted(unexplained[0]);
                        std::string lost, extra;
                        std::set_difference(merged.begin(), merged.end(), named.begin(), named.end(),
                                            std::back_inserter(lost));
                        std::set_difference(named.begin(), named.end(), merged.begin(), merged.end(),
                                            std::back_inserter(extra));
                        if (!lost.empty())
                            add(FK::StateStaleness, idx, "new cluster omits " + lost, merged, named);
                        else if (!extra.empty())
                            add(FK::ExecutionError, idx, "new cluster invents " + extra, merged, named);
                        if (named != merged)
                            alias[unexplained[0]] = merged;
                    }
                }
                partition.erase(u.cluster);
                partition.erase(v.cluster);
                consumed.insert(u.cluster);
                consumed.insert(v.cluster);
                partition.insert(merged);
                round.clear();
            }
        }
        if (!has_end())
            return;
        for (const auto& note : pending_omissions_)
            add(FK::ProcedureOmission, *end_, note);
        if (partition.size() > 2) {
            add(FK::ProcedureOmission, *end_,
                "stopped with " + std::to_string(partition.size()) + " clusters instead of two");
            return;
        }
        const auto* v = end_value();
        if (!v)
            return;
        std::vector<std::string> names;
        std::optional<std::int64_t> dist;
        for (const auto& item : v->items) {
            if (item.kind == AtomKind::Integer)
                dist = item.as_int();
            else if (item.kind == AtomKind::Name) {
                auto it = alias.find(item.text);
                names.push_back(it != alias.end() ? it->second : sorted(item.text));
            }
        }
        std::set<std::string> claimed(names.begin(), names.end());
        if (names.size() != 2 || claimed != partition) {
            std::string now;
            for (const auto& c : partition)
                now += (now.empty() ? "" : ",") + c;
            add(FK::UnfaithfulConclusion, *end_, "END clusters differ from the merge sequence", now, v->text);
            return;
        }
        const auto truth = single_link(p, *partition.begin(), *partition.rbegin());
        auto key = std::make_pair(*partition.begin(), *partition.rbegin());
        if (!dist) {
            add(FK::UnfaithfulConclusion, *end_, "END omits the final distance");
        } else if (auto it = last_check.find(key); it != last_check.end() && it->second != *dist) {
            add(FK::UnfaithfulConclusion, *end_, "END distance differs from the checked distance",
                std::to_string(it->second), std::to_string(*dist));
        } else if (*dist != truth) {
            add(FK::ExecutionError, *end_, "final single-linkage distance", std::to_string(truth),
                std::to_string(*dist));
        }
    }
    std::vector<std::string> pending_omissions_;

    // ---- factorization -------------------------------------------------

    void factorization() {
        const auto n = static_cast<std::int64_t>(inst_.as<FactorizationPayload>().n);
        std::optional<std::int64_t> cur;
        std::int64_t q = 2;
        std::optional<std::pair<std::int64_t, bool>> last_attempt;
        std::set<std::int64_t> tried;
        std::size_t attempts_since_state = 0;
        std::vector<std::int64_t> ratio_factors;
        for (std::size_t idx = 0; idx < dirs_.size(); ++idx) {
            const auto& d = dirs_[idx];
            if (skip_[idx])
                continue;
            if (d.type == DT::State) {
                const auto v = d.args[0].as_int();
                if (!cur) {
                    if (v != n)
                        add(FK::ExecutionError, idx, "first STATE must be the input", std::to_string(n),
                            std::to_string(v));
                } else if (attempts_since_state == 0) {
                    if (v == *cur)
                        add(FK::StateRevisitation, idx, "STATE repeated without any attempt");
                    else
                        add(FK::ExecutionError, idx, "STATE changed without a successful attempt",
                            std::to_string(*cur), std::to_string(v));
                } else if (!last_attempt || !last_attempt->second || *cur % last_attempt->first != 0) {
                    add(FK::ExecutionError, idx, "STATE changed without a dividing attempt", std::to_string(*cur),
                        std::to_string(v));
                } else if (v != *cur / last_attempt->first) {
                    add(FK::ExecutionError, idx, "quotient", std::to_string(*cur / last_attempt->first),
                        std::to_string(v));
                }
                if (cur && v > 0 && v < *cur && *cur % v == 0)
                    ratio_factors.push_back(*cur / v);
                cur = v;
                tried.clear();
                attempts_since_state = 0;
                last_attempt.reset();
            } else if (d.type == DT::Attempt) {
                const auto r = d.args[0].as_int();
                const auto pr = d.args[1].as_int();
                if (pr < 2 || !is_prime(static_cast<std::uint64_t>(pr))) {
                    add(FK::BoundaryViolation, idx, std::to_string(pr) + " is not a prime");
                    skip_[idx] = 1;
                    continue;
                }
                const bool declared = d.result && d.result->text == "True";
                ++attempts_since_state;
                if (cur && r != *cur) {
                    add(FK::StateStaleness, idx, "attempt against a number other than the current STATE",
                        std::to_string(*cur), std::to_string(r));
                } else if (!tried.insert(pr).second) {
                    add(FK::StateRevisitation, idx, "prime attempted again on the same STATE");
                    continue;
                } else if (pr > q) {
                    add(FK::ProcedureOmission, idx, "candidates skipped before this prime", std::to_string(q),
                        std::to_string(pr));
                }
                const bool truth = r != 0 && r % pr == 0;
                if (truth != declared)
                    add(FK::ExecutionError, idx, "divisibility", truth ? "True" : "False",
                        declared ? "True" : "False");
                last_attempt = std::make_pair(pr, declared);
                q = declared ? pr : static_cast<std::int64_t>(next_prime(static_cast<std::uint64_t>(pr)));
            }
        }
        if (!has_end())
            return;
        if (auto* v = end_value()) {
            auto claimed = v->as_int_list();
            auto implied = ratio_factors;
            std::sort(claimed.begin(), claimed.end());
            std::sort(implied.begin(), implied.end());
            if (claimed != implied)
                add(FK::UnfaithfulConclusion, *end_, "END factors differ from the STATE reductions",
                    ints_text(implied), v->text);
        }
        if (cur && *cur != 1)
            add(FK::ProcedureOmission, *end_, "ended with " + std::to_string(*cur) + " still unfactored");
    }

    // ---- permutation ---------------------------------------------------

    void permutation() {
        auto sorted = inst_.as<PermutationPayload>().elements;
        std::sort(sorted.begin(), sorted.end());
        std::map<int, int> budget;
        for (int e : sorted)
            ++budget[e];
        auto within = [&](const std::vector<int>& path) {
            if (path.size() > sorted.size())
                return false;
            std::map<int, int> used;
            for (int e : path)
                if (++used[e] > budget[e])
                    return false;
            return true;
        };
        auto as_path = [](const Atom& a) {
            std::vector<int> out;
            for (auto v : a.as_int_list())
                out.push_back(static_cast<int>(v));
            return out;
        };
        std::optional<std::vector<int>> cur;
        std::set<std::vector<int>> checked;
        std::set<std::vector<int>> reached;
        for (std::size_t idx = 0; idx < dirs_.size(); ++idx) {
            const auto& d = dirs_[idx];
            if (skip_[idx])
                continue;
            if (d.type == DT::Check) {
                auto path = as_path(d.args[0]);
                if (!within(path)) {
                    add(FK::BoundaryViolation, idx, "path uses elements beyond the multiset");
                    skip_[idx] = 1;
                    continue;
                }
                if (checked.count(path)) {
                    add(FK::StateRevisitation, idx, "prefix explored again");
                    continue;
                }
                bool child = cur ? (path.size() == cur->size() + 1 &&
                                    std::equal(cur->begin(), cur->end(), path.begin()))
                                 : path.empty();
                if (!child)
                    add(FK::IncorrectBacktracking, idx,
                        cur ? "CHECK does not extend the current path " + path_key(*cur)
                            : "search must start from []");
                const bool done = path.size() == sorted.size();
                const std::string want = done ? "done" : "continue";
                if (d.result && d.result->text != want)
                    add(FK::ExecutionError, idx, "completion status", want, d.result->text);
                checked.insert(path);
                if (done)
                    reached.insert(path);
                cur = path;
            } else if (d.type == DT::Backtrack) {
                auto path = as_path(d.args[0]);
                if (!within(path)) {
                    add(FK::BoundaryViolation, idx, "path uses elements beyond the multiset");
                    skip_[idx] = 1;
                    continue;
                }
                if (!cur || cur->empty()) {
                    add(FK::IncorrectBacktracking, idx, "nothing to backtrack from");
                } else {
                    auto parent = *cur;
                    parent.pop_back();
                    if (path != parent) {
                        add(FK::IncorrectBacktracking, idx, "BACKTRACK target is not the parent",
                            path_key(parent), path_key(path));
                    } else {
                        std::size_t open = 0;
                        for (const auto& c : permutation_children(sorted, *cur))
                            open += !checked.count(c);
                        if (open)
                            add(FK::IncorrectBacktracking, idx,
                                "left " + path_key(*cur) + " with " + std::to_string(open) +
                                    " unexplored branches");
                    }
                }
                cur = path;
            }
        }
        goals_total_ = static_cast<std::size_t>(multinomial_count(sorted));
        reached_ = reached;
        coverage_ = goals_total_ ? static_cast<double>(reached.size()) / static_cast<double>(goals_total_) : 0.0;
        if (has_end() && reached.size() < goals_total_)
            add(FK::ProcedureOmission, *end_,
                "reached " + std::to_string(reached.size()) + " of " + std::to_string(goals_total_) +
                    " unique permutations");
    }

    // ---- game24 --------------------------------------------------------

    void game24() {
        const auto& cards = inst_.as<Game24Payload>().cards;
        std::map<std::string, std::pair<std::size_t, std::string>> attempted; // canonical -> (idx, value)
        for (std::size_t idx = 0; idx < dirs_.size(); ++idx) {
            const auto& d = dirs_[idx];
            if (skip_[idx] || d.type != DT::Attempt)
                continue;
            const auto& text = d.args[0].text;
            ExprPtr e;
            try {
                e = parse_expression(text);
            } catch (const Error&) {
                add(FK::BoundaryViolation, idx, "not an arithmetic expression over the cards");
                skip_[idx] = 1;
                continue;
            }
            ExpressionReport report;
            try {
                report = verify_expression_24(text, cards);
            } catch (const Error&) {
                report.cards_ok = true;
                report.violations.clear();
                // Evaluation failed; card usage is judged separately below.
                std::vector<const Expr*> lits;
                collect_literals(*e, lits);
                std::vector<int> used;
                bool ints = true;
                for (auto* l : lits) {
                    if (denominator(l->value) != 1) {
                        ints = false;
                        break;
                    }
                    used.push_back(numerator(l->value).convert_to<int>());
                }
                std::vector<int> have(cards.begin(), cards.end());
                std::sort(used.begin(), used.end());
                std::sort(have.begin(), have.end());
                if (!ints || used != have) {
                    add(FK::BoundaryViolation, idx, "card misuse");
                    skip_[idx] = 1;
                    continue;
                }
                add(FK::ExecutionError, idx, "division by zero", "undefined", d.result ? d.result->text : "");
                continue;
            }
            if (!report.violations.empty()) {
                std::string all;
                for (const auto& v : report.violations)
                    all += (all.empty() ? "" : "; ") + v;
                add(FK::BoundaryViolation, idx, all);
                skip_[idx] = 1;
                continue;
            }
            const auto key = canonical_form(*e);
            if (auto it = attempted.find(key); it != attempted.end()) {
                add(FK::StateRevisitation, idx, "same expression attempted again").related_index = it->second.first;
                continue;
            }
            const auto declared = d.result ? d.result->text : std::string();
            if (!decimal_matches(report.value, declared))
                add(FK::ExecutionError, idx, "expression value", format_rational(report.value), declared);
            attempted[key] = {idx, declared};
        }
        if (!has_end())
            return;
        const auto* v = end_value();
        if (!v)
            return;
        ExprPtr e;
        try {
            e = parse_expression(v->text);
        } catch (const Error&) {
            add(FK::UnfaithfulConclusion, *end_, "END is not an expression");
            return;
        }
        auto it = attempted.find(canonical_form(*e));
        if (it == attempted.end()) {
            add(FK::UnfaithfulConclusion, *end_, "END expression was never attempted");
        } else if (!decimal_matches(Rational(24), it->second.second)) {
            add(FK::UnfaithfulConclusion, *end_, "END expression was attempted with a value other than 24", "24",
                it->second.second).related_index = it->second.first;
        }
    }

    // ---- verdict -------------------------------------------------------

    std::optional<Answer> end_answer() const {
        if (!end_)
            return std::nullopt;
        Answer a;
        a.kind = inst_.kind;
        const Atom* v = end_value();
        if (inst_.kind == TaskKind::PermutationWithDuplicates) {
            a.permutations = reached_ ? *reached_ : std::set<std::vector<int>>{};
            return a;
        }
        if (!v)
            return std::nullopt;
        try {
            switch (inst_.kind) {
            case TaskKind::CountingElements:
            case TaskKind::FloodFill:
            case TaskKind::EditDistance:
                a.scalar = v->as_int();
                break;
            case TaskKind::SlidingWindowMax:
            case TaskKind::PrimeFactorization:
                a.values = v->as_int_list();
                break;
            case TaskKind::HierarchicalClustering: {
                std::vector<std::string> names;
                for (const auto& item : v->items) {
                    if (item.kind == AtomKind::Integer)
                        a.clusters.distance = item.as_int();
                    else {
                        auto s = item.text;
                        std::sort(s.begin(), s.end());
                        names.push_back(s);
                    }
                }
                if (names.size() != 2)
                    return std::nullopt;
                a.clusters.first = names[0];
                a.clusters.second = names[1];
                break;
            }
            case TaskKind::Game24:
                a.game.solvable = true;
                a.game.witness = v->text;
                break;
            default:
                break;
            }
        } catch (const Error&) {
            return std::nullopt;
        }
        return a;
    }

    bool final_correct_ = false;

    void verdict_layer() {
        if (end_) {
            auto claimed = end_answer();
            if (inst_.kind == TaskKind::PermutationWithDuplicates) {
                final_correct_ = claimed && claimed->permutations == ref_.final_answer.permutations;
            } else if (inst_.kind == TaskKind::Game24) {
                final_correct_ = false;
                if (claimed) {
                    try {
                        auto r = verify_expression_24(claimed->game.witness, inst_.as<Game24Payload>().cards);
                        final_correct_ = r.violations.empty() && r.value == 24;
                    } catch (const Error&) {
                    }
                }
            } else {
                final_correct_ = claimed && answers_equal(inst_, *claimed, ref_.final_answer);
            }
            if (!final_correct_) {
                auto& f = add(FK::WrongAnswer, *end_, "final answer differs from the reference");
                f.expected = answer_to_json(ref_.final_answer).dump();
                if (claimed)
                    f.observed = answer_to_json(*claimed).dump();
            }
        }
        if (tr_.truncated) {
            Finding f;
            f.kind = FK::Incomplete;
            f.note = "trace has no END";
            findings_.push_back(f);
        }
    }

    AuditVerdict finish() {
        // Dedupe by (kind, span) and fix the order.
        std::vector<Finding> out;
        std::set<std::tuple<int, int, std::size_t, std::size_t, int>> seen;
        for (auto& f : findings_) {
            auto key = std::make_tuple(static_cast<int>(f.kind), f.span ? 1 : 0, f.span ? f.span->begin : 0,
                                       f.span ? f.span->end : 0, static_cast<int>(f.channel));
            if (seen.insert(key).second)
                out.push_back(std::move(f));
        }
        std::stable_sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
            const auto ai = a.directive_index ? *a.directive_index : SIZE_MAX;
            const auto bi = b.directive_index ? *b.directive_index : SIZE_MAX;
            if (ai != bi)
                return ai < bi;
            return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        });
        AuditVerdict v;
        v.findings = std::move(out);
        v.final_answer_correct = final_correct_;
        v.coverage = coverage_;
        v.goals_total = goals_total_;
        v.goals_reached = reached_ ? reached_->size() : 0;
        v.steps_total = dirs_.size();
        std::set<std::size_t> implicated;
        for (const auto& f : v.findings)
            if (f.directive_index && is_taxonomy_kind(f.kind) && f.kind != FK::ProcedureOmission)
                implicated.insert(*f.directive_index);
        for (std::size_t i = 0; i < dirs_.size(); ++i)
            if (skip_[i])
                implicated.insert(i);
        v.steps_valid = dirs_.size() - implicated.size();
        for (const auto& d : tr_.diagnostics)
            (d.severity == Severity::Fatal ? v.parse_fatals : v.parse_warnings)++;
        try {
            auto problem = adapt_to_abstract(inst_);
            auto annotated = validate_transitions(problem, trace_to_steps(inst_, dirs_));
            v.effective = is_effective(annotated);
        } catch (const Error&) {
            v.effective = false;
        }
        return v;
    }
};

} // namespace

AuditVerdict audit_trace(const TaskInstance& instance, const ReferenceSolution& reference,
                         const ParsedTrace& trace, const std::optional<std::string>& thinking,
                         const AuditOptions& options) {
    if (trace.kind != instance.kind)
        fail(ErrorCode::KindMismatch, "trace parsed as " + std::string(to_string(trace.kind)) + " for a " +
                                          std::string(to_string(instance.kind)) + " instance");
    return Auditor(instance, reference, trace, thinking, options).run();
}

AuditVerdict audit_response(const TaskInstance& instance, const ReferenceSolution& reference,
                            const std::string& raw, const std::optional<std::string>& thinking,
                            AuditOptions options) {
    auto block = extract_answer_block(raw);
    options.had_tags = block.had_tags;
    auto trace = parse_trace(instance.kind, block.payload);
    return audit_trace(instance, reference, trace, thinking, options);
}

ReferenceSolution reference_for_audit(const TaskInstance& instance) {
    try {
        return canonical_trace(instance);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoSolution)
            throw;
        ReferenceSolution r;
        r.final_answer.kind = instance.kind;
        r.final_answer.game.solvable = false;
        r.solver_name = "exhaustive_enumeration";
        return r;
    }
}

json finding_to_json(const Finding& f) {
    json j;
    j["kind"] = to_string(f.kind);
    j["directive_index"] = f.directive_index ? json(*f.directive_index) : json(nullptr);
    j["span"] = f.span ? json::array({f.span->begin, f.span->end}) : json(nullptr);
    j["channel"] = f.channel == Channel::Answer ? "answer" : f.channel == Channel::Thinking ? "thinking" : "raw";
    j["expected"] = f.expected ? json(*f.expected) : json(nullptr);
    j["observed"] = f.observed ? json(*f.observed) : json(nullptr);
    if (f.related_index)
        j["related_index"] = *f.related_index;
    j["note"] = f.note;
    return j;
}

json verdict_to_json(const AuditVerdict& v, const std::string& instance_id, const std::string& model) {
    json findings = json::array();
    for (const auto& f : v.findings)
        findings.push_back(finding_to_json(f));
    json counts = json::object();
    for (std::size_t k = 0; k < kFindingNames.size(); ++k)
        counts[std::string(kFindingNames[k])] = v.count(static_cast<FindingKind>(k));
    return {{"instance_id", instance_id},
            {"model", model},
            {"findings", findings},
            {"effective", v.effective},
            {"final_answer_correct", v.final_answer_correct},
            {"coverage", v.coverage ? json(*v.coverage) : json(nullptr)},
            {"counts",
             {{"steps_total", v.steps_total},
              {"steps_valid", v.steps_valid},
              {"goals_reached", v.goals_reached},
              {"goals_total", v.goals_total},
              {"parse_warnings", v.parse_warnings},
              {"parse_fatals", v.parse_fatals},
              {"findings", counts}}}};
}

FixtureResult audit_fixture(const json& fixture) {
    FixtureResult out;
    try {
        out.id = fixture.at("id").get<std::string>();
        out.model = fixture.value("model", std::string("fixture"));
        const auto kind = parse_task_kind(fixture.at("kind").get<std::string>());
        out.instance = make_instance(kind, payload_from_json(kind, fixture.at("payload")));
        for (const auto& k : fixture.at("annotated"))
            out.annotated.push_back(parse_finding_kind(k.get<std::string>()));
        std::optional<std::string> thinking;
        if (fixture.contains("thinking") && fixture["thinking"].is_string())
            thinking = fixture["thinking"].get<std::string>();
        const auto raw = fixture.at("raw").get<std::string>();
        auto reference = reference_for_audit(out.instance);
        out.verdict = audit_response(out.instance, reference, raw, thinking);
    } catch (const json::exception& e) {
        fail(ErrorCode::FixtureFormatError, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::FormatError || e.code() == ErrorCode::SizeOutOfRange ||
            e.code() == ErrorCode::KindMismatch)
            fail(ErrorCode::FixtureFormatError, e.what());
        throw;
    }
    out.annotated_present = std::all_of(out.annotated.begin(), out.annotated.end(),
                                        [&](FindingKind k) { return out.verdict.has(k); });
    return out;
}

FixtureResult audit_fixture_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::IoError, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::FixtureFormatError, path + ": " + e.what());
    }
    return audit_fixture(j);
}

} // namespace tracewise
