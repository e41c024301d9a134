#include "tracewise/audit.hpp"

#include "tracewise/error.hpp"
#include "tracewise/rng.hpp"

#include <algorithm>
#include <functional>

namespace tracewise {

namespace {

using FK = FindingKind;
using DT = DirectiveType;

struct Mutation {
    std::vector<Directive> dirs;
    std::size_t index = 0; // directive the expected finding points at
};

std::vector<std::size_t> where(const std::vector<Directive>& dirs,
                               const std::function<bool(std::size_t)>& pred) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        if (pred(i))
            out.push_back(i);
    return out;
}

std::size_t end_index(const std::vector<Directive>& dirs) {
    for (std::size_t i = dirs.size(); i-- > 0;)
        if (dirs[i].type == DT::End)
            return i;
    fail(ErrorCode::InapplicableCorruption, "reference trace has no END");
}

Directive directive(DT type, std::vector<Atom> args, std::optional<Atom> result = std::nullopt) {
    Directive d;
    d.type = type;
    d.args = std::move(args);
    d.result = std::move(result);
    return d;
}

Atom value_atom(const Rational& v) {
    auto text = format_rational(v);
    if (text.find('.') == std::string::npos)
        return Atom{AtomKind::Integer, text, {}};
    return Atom::decimal(text);
}

class Corrupter {
public:
    Corrupter(const TaskInstance& instance, const ReferenceSolution& reference, std::uint64_t seed)
        : inst_(instance), base_(reference.directives), rng_(seed) {}

    // nullopt when the kind does not apply to this instance.
    std::optional<Mutation> apply(FK kind) {
        if (base_.empty())
            return std::nullopt;
        if (kind == FK::InfiniteSelfLoop)
            return self_loop();
        switch (inst_.kind) {
        case TaskKind::CountingElements: return counting(kind);
        case TaskKind::SlidingWindowMax: return sliding(kind);
        case TaskKind::FloodFill: return flood(kind);
        case TaskKind::EditDistance: return edit(kind);
        case TaskKind::HierarchicalClustering: return clustering(kind);
        case TaskKind::PrimeFactorization: return factorization(kind);
        case TaskKind::PermutationWithDuplicates: return permutation(kind);
        case TaskKind::Game24: return game24(kind);
        }
        return std::nullopt;
    }

private:
    const TaskInstance& inst_;
    const std::vector<Directive>& base_;
    Rng rng_;

    template <class T>
    std::optional<T> pick(const std::vector<T>& v) {
        if (v.empty())
            return std::nullopt;
        return v[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
    }

    std::optional<std::size_t> pick_where(const std::function<bool(std::size_t)>& pred) {
        return pick(where(base_, pred));
    }

    Mutation insert_at(std::size_t at, Directive d) {
        Mutation m{base_, at};
        m.dirs.insert(m.dirs.begin() + static_cast<std::ptrdiff_t>(at), std::move(d));
        return m;
    }

    Mutation duplicate(std::size_t at) { return insert_at(at + 1, base_[at]); }

    Mutation erase(std::size_t at, std::size_t expected) {
        Mutation m{base_, expected};
        m.dirs.erase(m.dirs.begin() + static_cast<std::ptrdiff_t>(at));
        return m;
    }

    std::optional<Mutation> self_loop() {
        auto at = pick_where([&](std::size_t i) { return base_[i].type != DT::End; });
        if (!at)
            return std::nullopt;
        Mutation m{base_, *at + 2};
        m.dirs.insert(m.dirs.begin() + static_cast<std::ptrdiff_t>(*at), 3, base_[*at]);
        return m;
    }

    Mutation bump_end_int(std::int64_t delta) {
        Mutation m{base_, end_index(base_)};
        auto& r = *m.dirs[m.index].result;
        r = Atom::integer(r.as_int() + delta);
        return m;
    }

    // Bumps the last CHECK result and END together: a wrong step the
    // conclusion faithfully reports.
    std::optional<Mutation> bump_last_check_and_end() {
        auto at = pick_where([&](std::size_t i) {
            return base_[i].type == DT::Check && i + 1 < base_.size() && base_[i + 1].type == DT::End;
        });
        if (!at)
            return std::nullopt;
        Mutation m{base_, *at};
        const auto v = m.dirs[*at].result->as_int() + 1;
        m.dirs[*at].result = Atom::integer(v);
        m.dirs[*at + 1].result = Atom::integer(v);
        return m;
    }

    std::optional<Mutation> counting(FK kind) {
        const auto& p = inst_.as<CountingPayload>();
        const auto n = static_cast<std::int64_t>(p.sequence.size());
        const auto end = end_index(base_);
        auto is_match = [&](std::size_t i) {
            return base_[i].type == DT::Check && p.sequence[base_[i].args[0].as_int()] == p.target;
        };
        switch (kind) {
        case FK::BoundaryViolation: {
            if (auto at = pick_where([&](std::size_t i) { return base_[i].type == DT::Check && !is_match(i); })) {
                Mutation m{base_, *at};
                m.dirs[*at].args[0] = Atom::integer(n + rng_.uniform_int(0, 9));
                return m;
            }
            return insert_at(end, directive(DT::Check, {Atom::integer(n)}, base_[end].result));
        }
        case FK::ProcedureOmission: {
            auto at = pick_where([&](std::size_t i) { return is_match(i) && i + 1 < end; });
            if (!at)
                return std::nullopt;
            return erase(*at, end - 1);
        }
        case FK::StateRevisitation: {
            auto at = pick_where([&](std::size_t i) { return base_[i].type == DT::Check; });
            if (!at)
                return std::nullopt;
            return duplicate(*at);
        }
        case FK::ExecutionError: return bump_last_check_and_end();
        case FK::UnfaithfulConclusion: return bump_end_int(1);
        default: return std::nullopt;
        }
    }

    std::optional<Mutation> sliding(FK kind) {
        const auto& p = inst_.as<SlidingWindowPayload>();
        const auto n = static_cast<std::int64_t>(p.values.size());
        const auto end = end_index(base_);
        auto checks = where(base_, [&](std::size_t i) { return base_[i].type == DT::Check; });
        if (checks.empty())
            return std::nullopt;
        switch (kind) {
        case FK::BoundaryViolation:
            return insert_at(end, directive(DT::Check, {Atom::integer(n), Atom::integer(n + p.window)},
                                            Atom::integer(0)));
        case FK::ProcedureOmission: {
            auto m = erase(checks.back(), end - 1);
            auto values = m.dirs[m.index].result->as_int_list();
            values.pop_back();
            m.dirs[m.index].result = Atom::int_list(values);
            return m;
        }
        case FK::StateRevisitation: return duplicate(*pick(checks));
        case FK::ExecutionError: {
            const auto slot = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(checks.size()) - 1));
            Mutation m{base_, checks[slot]};
            const auto v = m.dirs[m.index].result->as_int() + 1;
            m.dirs[m.index].result = Atom::integer(v);
            auto values = m.dirs[end].result->as_int_list();
            values[slot] = v;
            m.dirs[end].result = Atom::int_list(values);
            return m;
        }
        case FK::UnfaithfulConclusion: {
            Mutation m{base_, end};
            auto values = m.dirs[end].result->as_int_list();
            values[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(values.size()) - 1))] += 1;
            m.dirs[end].result = Atom::int_list(values);
            return m;
        }
        default: return std::nullopt;
        }
    }

    std::optional<Mutation> flood(FK kind) {
        const auto& p = inst_.as<FloodFillPayload>();
        const auto end = end_index(base_);
        // A VISIT whose island id already appeared earlier.
        auto repeat_id = [&](std::size_t i) {
            if (base_[i].type != DT::Visit)
                return false;
            for (std::size_t j = 0; j < i; ++j)
                if (base_[j].type == DT::Visit && base_[j].result == base_[i].result)
                    return true;
            return false;
        };
        switch (kind) {
        case FK::BoundaryViolation:
            return insert_at(end, directive(DT::Visit, {Atom::integer(p.rows()), Atom::integer(0)},
                                            Atom::integer(1)));
        case FK::ProcedureOmission: {
            auto at = pick_where(repeat_id);
            if (!at)
                return std::nullopt;
            return erase(*at, end - 1);
        }
        case FK::StateRevisitation: {
            auto at = pick_where([&](std::size_t i) { return base_[i].type == DT::Visit; });
            if (!at)
                return std::nullopt;
            return duplicate(*at);
        }
        case FK::ExecutionError: {
            if (auto at = pick_where(repeat_id)) {
                Mutation m{base_, *at};
                m.dirs[*at].result = Atom::integer(m.dirs[*at].result->as_int() + 1);
                return m;
            }
            for (int r = 0; r < p.rows(); ++r)
                for (int c = 0; c < p.cols(); ++c)
                    if (!p.land(r, c))
                        return insert_at(end, directive(DT::Visit, {Atom::integer(r), Atom::integer(c)},
                                                        Atom::integer(1)));
            return std::nullopt;
        }
        case FK::UnfaithfulConclusion: return bump_end_int(1);
        default: return std::nullopt;
        }
    }

    std::optional<Mutation> edit(FK kind) {
        const auto& p = inst_.as<EditDistancePayload>();
        const auto end = end_index(base_);
        switch (kind) {
        case FK::BoundaryViolation:
            return insert_at(end, directive(DT::Check,
                                            {Atom::integer(static_cast<std::int64_t>(p.source.size()) + 1),
                                             Atom::integer(0)},
                                            Atom::integer(0)));
        case FK::ProcedureOmission: {
            auto at = pick_where([&](std::size_t i) { return base_[i].type == DT::Check && i + 1 < end; });
            if (!at)
                return std::nullopt;
            return erase(*at, end - 1);
        }
        case FK::StateRevisitation: return duplicate(*pick_where([&](std::size_t i) { return i < end; }));
        case FK::ExecutionError: return bump_last_check_and_end();
        case FK::UnfaithfulConclusion: return bump_end_int(1);
        default: return std::nullopt;
        }
    }

    std::optional<Mutation> clustering(FK kind) {
        const auto& p = inst_.as<ClusteringPayload>();
        const auto end = end_index(base_);
        auto checks = where(base_, [&](std::size_t i) { return base_[i].type == DT::Check; });
        auto merges = where(base_, [&](std::size_t i) { return base_[i].type == DT::Merge; });
        switch (kind) {
        case FK::BoundaryViolation: {
            const std::string ghost = p.points < 26 ? std::string(1, static_cast<char>('A' + p.points)) : "AA";
            return insert_at(0, directive(DT::Check, {Atom::name("A"), Atom::name(ghost)}, Atom::integer(1)));
        }
        case FK::ProcedureOmission: {
            auto at = pick(checks);
            if (!at)
                return std::nullopt;
            return erase(*at, end - 1);
        }
        case FK::StateRevisitation: {
            auto at = pick(checks);
            if (!at)
                return std::nullopt;
            return duplicate(*at);
        }
        case FK::StateStaleness: {
            auto at = pick(merges);
            if (!at)
                return std::nullopt;
            Mutation m{base_, *at};
            auto& d = m.dirs[*at];
            std::string merged = d.args[0].text + d.args[1].text;
            std::sort(merged.begin(), merged.end());
            for (auto& item : d.result->items)
                if (item.kind == AtomKind::Name && item.text == merged)
                    item = Atom::name(merged.substr(0, merged.size() - 1));
            return m;
        }
        case FK::ExecutionError: {
            auto at = pick(checks);
            if (!at)
                return std::nullopt;
            Mutation m{base_, *at};
            m.dirs[*at].result = Atom::integer(m.dirs[*at].result->as_int() + 1);
            return m;
        }
        case FK::UnfaithfulConclusion: {
            Mutation m{base_, end};
            auto& items = m.dirs[end].result->items;
            std::string both = items[0].text + items[1].text;
            std::sort(both.begin(), both.end());
            items[0] = Atom::name(both);
            return m;
        }
        default: return std::nullopt;
        }
    }

    std::optional<Mutation> factorization(FK kind) {
        const auto end = end_index(base_);
        auto attempts = where(base_, [&](std::size_t i) { return base_[i].type == DT::Attempt; });
        auto falses = where(base_, [&](std::size_t i) {
            return base_[i].type == DT::Attempt && base_[i].result->text == "False";
        });
        switch (kind) {
        case FK::BoundaryViolation: {
            const auto n = base_[0].args[0].as_int();
            return insert_at(1, directive(DT::Attempt, {Atom::integer(n), Atom::integer(4)},
                                          Atom::keyword(n % 4 == 0 ? "True" : "False")));
        }
        case FK::ProcedureOmission: {
            // The attempt after the deleted one now skips a candidate.
            auto at = pick(falses);
            if (!at)
                return std::nullopt;
            return erase(*at, *at);
        }
        case FK::StateRevisitation: {
            auto at = pick(attempts);
            if (!at)
                return std::nullopt;
            return duplicate(*at);
        }
        case FK::StateStaleness: {
            std::vector<std::pair<std::size_t, std::int64_t>> options;
            std::optional<std::int64_t> prev_state, cur_state;
            for (std::size_t i = 0; i < base_.size(); ++i) {
                const auto& d = base_[i];
                if (d.type == DT::State) {
                    prev_state = cur_state;
                    cur_state = d.args[0].as_int();
                } else if (d.type == DT::Attempt && prev_state) {
                    const auto pr = d.args[1].as_int();
                    if ((*prev_state % pr == 0) == (d.result->text == "True"))
                        options.emplace_back(i, *prev_state);
                }
            }
            auto choice = pick(options);
            if (!choice)
                return std::nullopt;
            Mutation m{base_, choice->first};
            m.dirs[choice->first].args[0] = Atom::integer(choice->second);
            return m;
        }
        case FK::ExecutionError: {
            auto at = pick_where([&](std::size_t i) {
                return base_[i].type == DT::Attempt && base_[i].result->text == "True";
            });
            if (!at)
                return std::nullopt;
            Mutation m{base_, *at};
            m.dirs[*at].result = Atom::keyword("False");
            return m;
        }
        case FK::UnfaithfulConclusion: {
            Mutation m{base_, end};
            auto values = m.dirs[end].result->as_int_list();
            if (values.empty())
                return std::nullopt;
            values.back() += 1;
            m.dirs[end].result = Atom::int_list(values);
            return m;
        }
        default: return std::nullopt;
        }
    }

    std::optional<Mutation> permutation(FK kind) {
        const auto& elements = inst_.as<PermutationPayload>().elements;
        auto checks = where(base_, [&](std::size_t i) { return base_[i].type == DT::Check; });
        auto internal = where(base_, [&](std::size_t i) {
            return base_[i].type == DT::Check && base_[i].result->text == "continue";
        });
        switch (kind) {
        case FK::BoundaryViolation: {
            auto at = pick(internal);
            if (!at)
                return std::nullopt;
            auto path = base_[*at].args[0].as_int_list();
            path.push_back(*std::max_element(elements.begin(), elements.end()) + 1);
            return insert_at(*at + 1, directive(DT::Check, {Atom::int_list(path)}, Atom::keyword("continue")));
        }
        case FK::ProcedureOmission: {
            // Drop the subtree of the last child of the root.
            std::vector<std::size_t> root_children;
            for (std::size_t i : checks)
                if (base_[i].args[0].items.size() == 1)
                    root_children.push_back(i);
            if (root_children.size() < 2)
                return std::nullopt;
            const auto from = root_children.back();
            const auto to = end_index(base_); // exclusive; the last BACKTRACK([]) precedes END
            Mutation m{base_, from};
            m.dirs.erase(m.dirs.begin() + static_cast<std::ptrdiff_t>(from),
                         m.dirs.begin() + static_cast<std::ptrdiff_t>(to));
            m.index = end_index(m.dirs);
            return m;
        }
        case FK::IncorrectBacktracking: {
            auto at = pick_where([&](std::size_t i) { return base_[i].type == DT::Backtrack; });
            if (!at)
                return std::nullopt;
            // The path the search is on right before this BACKTRACK.
            std::vector<std::int64_t> cur;
            for (std::size_t i = 0; i < *at; ++i)
                cur = base_[i].args[0].as_int_list();
            Mutation m{base_, *at};
            m.dirs[*at].args[0] = Atom::int_list(cur);
            return m;
        }
        case FK::StateRevisitation: {
            auto at = pick(checks);
            if (!at)
                return std::nullopt;
            return duplicate(*at);
        }
        case FK::ExecutionError: {
            auto at = pick(internal);
            if (!at)
                return std::nullopt;
            Mutation m{base_, *at};
            m.dirs[*at].result = Atom::keyword("done");
            return m;
        }
        default: return std::nullopt;
        }
    }

    std::optional<Mutation> game24(FK kind) {
        const auto& cards = inst_.as<Game24Payload>().cards;
        const auto end = end_index(base_);
        const auto witness = end - 1; // the 24 attempt right before END
        auto others = where(base_, [&](std::size_t i) { return base_[i].type == DT::Attempt && i != witness; });
        switch (kind) {
        case FK::BoundaryViolation: {
            const Rational v = Rational(cards[0]) + Rational(cards[1]);
            return insert_at(0, directive(DT::Attempt,
                                          {Atom::expression(std::to_string(cards[0]) + "+" + std::to_string(cards[1]))},
                                          value_atom(v)));
        }
        case FK::StateRevisitation: return duplicate(*pick_where([&](std::size_t i) { return i < end; }));
        case FK::ExecutionError: {
            auto at = pick(others);
            if (!at)
                return std::nullopt;
            Mutation m{base_, *at};
            auto value = evaluate(*parse_expression(m.dirs[*at].args[0].text)) + 1;
            m.dirs[*at].result = value_atom(value);
            return m;
        }
        case FK::UnfaithfulConclusion: {
            auto at = pick(others);
            if (!at)
                return std::nullopt;
            Mutation m{base_, end};
            m.dirs[end].result = Atom::expression("(" + base_[*at].args[0].text + ")");
            return m;
        }
        default: return std::nullopt;
        }
    }
};

} // namespace

Corruption corrupt_trace(const TaskInstance& instance, const ReferenceSolution& reference, FindingKind kind,
                         std::uint64_t seed) {
    if (!is_taxonomy_kind(kind))
        fail(ErrorCode::InapplicableCorruption, std::string(to_string(kind)) + " is not a failure-mode kind");
    auto m = Corrupter(instance, reference, seed).apply(kind);
    if (!m)
        fail(ErrorCode::InapplicableCorruption,
             std::string(to_string(kind)) + " does not apply to " + instance.instance_id);
    Corruption c;
    c.text = serialize_directives(m->dirs);
    c.directives = parse_trace(instance.kind, c.text).directives;
    c.expected.kind = kind;
    c.expected.directive_index = m->index;
    if (m->index < c.directives.size())
        c.expected.span = c.directives[m->index].span;
    return c;
}

bool corruption_applicable(const TaskInstance& instance, const ReferenceSolution& reference, FindingKind kind) {
    if (!is_taxonomy_kind(kind))
        return false;
    return Corrupter(instance, reference, 0).apply(kind).has_value();
}

} // namespace tracewise
