#include "tracewise/harness.hpp"

#include "tracewise/error.hpp"
#include "tracewise/rng.hpp"
#include "tracewise/solvers.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace tracewise {

std::string policy_tag(const AgentPolicy& policy) {
    switch (policy.type) {
    case AgentPolicy::Type::Perfect: return "perfect";
    case AgentPolicy::Type::Wanderer: {
        std::ostringstream out;
        out << "wanderer:" << policy.p_w;
        return out.str();
    }
    case AgentPolicy::Type::Corrupted: return "corrupted:" + std::string(to_string(policy.corruption));
    }
    return "perfect";
}

AgentPolicy parse_policy(const std::string& tag) {
    const auto colon = tag.find(':');
    const auto head = tag.substr(0, colon);
    const auto arg = colon == std::string::npos ? std::string() : tag.substr(colon + 1);
    if (head == "perfect" && arg.empty())
        return AgentPolicy::perfect();
    if (head == "wanderer") {
        std::size_t used = 0;
        double p = -1.0;
        try {
            p = std::stod(arg, &used);
        } catch (const std::exception&) {
        }
        if (used != arg.size() || !(p >= 0.0 && p <= 1.0))
            fail(ErrorCode::InapplicablePolicy, "wanderer needs an omission rate in [0, 1]: '" + tag + "'");
        return AgentPolicy::wanderer(p);
    }
    if (head == "corrupted") {
        FindingKind k;
        try {
            k = parse_finding_kind(arg);
        } catch (const Error&) {
            fail(ErrorCode::InapplicablePolicy, "unknown corruption '" + arg + "'");
        }
        if (!is_taxonomy_kind(k))
            fail(ErrorCode::InapplicablePolicy, "'" + arg + "' is not a failure-mode kind");
        return AgentPolicy::corrupted(k);
    }
    fail(ErrorCode::InapplicablePolicy, "unknown agent policy '" + tag + "'");
}

std::vector<Directive> wanderer_trace(const TaskInstance& instance, const ReferenceSolution& reference, double p_w,
                                      std::uint64_t seed) {
    if (!(p_w >= 0.0 && p_w <= 1.0))
        fail(ErrorCode::InapplicablePolicy, "omission rate must lie in [0, 1]");
    if (reference.directives.empty())
        fail(ErrorCode::InapplicablePolicy, instance.instance_id + " has no reference trace to wander from");
    Rng rng(seed);
    if (instance.kind != TaskKind::PermutationWithDuplicates) {
        std::vector<Directive> out;
        for (const auto& d : reference.directives)
            if (d.type == DirectiveType::End || !rng.bernoulli(p_w))
                out.push_back(d);
        return out;
    }
    auto sorted = instance.as<PermutationPayload>().elements;
    std::sort(sorted.begin(), sorted.end());
    auto path_atom = [](const std::vector<int>& path) {
        return Atom::int_list(std::vector<std::int64_t>(path.begin(), path.end()));
    };
    std::vector<Directive> out;
    auto emit = [&](DirectiveType type, const std::vector<int>& path, std::optional<Atom> result) {
        Directive d;
        d.type = type;
        d.args = {path_atom(path)};
        d.result = std::move(result);
        out.push_back(std::move(d));
    };
    std::function<void(const std::vector<int>&)> dfs = [&](const std::vector<int>& path) {
        const bool done = path.size() == sorted.size();
        emit(DirectiveType::Check, path, Atom::keyword(done ? "done" : "continue"));
        if (done)
            return;
        for (const auto& child : permutation_children(sorted, path)) {
            // The root keeps all its children; each decision below it omits a
            // child with probability p_w.
            if (!path.empty() && rng.bernoulli(p_w))
                continue;
            dfs(child);
            emit(DirectiveType::Backtrack, path, std::nullopt);
        }
    };
    dfs({});
    Directive end;
    end.type = DirectiveType::End;
    out.push_back(end);
    return out;
}

ResponseRecord synthetic_agent_respond(const TaskInstance& instance, const AgentPolicy& policy, std::uint64_t seed) {
    ReferenceSolution reference;
    try {
        reference = canonical_trace(instance);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoSolution)
            throw;
        fail(ErrorCode::InapplicablePolicy, instance.instance_id + " has no solution to emit");
    }
    std::string body;
    switch (policy.type) {
    case AgentPolicy::Type::Perfect: body = reference.canonical_trace; break;
    case AgentPolicy::Type::Wanderer:
        body = serialize_directives(wanderer_trace(instance, reference, policy.p_w, seed));
        break;
    case AgentPolicy::Type::Corrupted:
        try {
            body = corrupt_trace(instance, reference, policy.corruption, seed).text;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InapplicableCorruption)
                throw;
            fail(ErrorCode::InapplicablePolicy, e.what());
        }
        break;
    }
    ResponseRecord r;
    r.instance_id = instance.instance_id;
    r.model = policy_tag(policy);
    r.raw = "<answer>\n" + body + "</answer>\n";
    return r;
}

} // namespace tracewise
