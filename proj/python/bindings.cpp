#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "tracewise/audit.hpp"
#include "tracewise/error.hpp"
#include "tracewise/expression.hpp"
#include "tracewise/harness.hpp"
#include "tracewise/instance.hpp"
#include "tracewise/metrics.hpp"
#include "tracewise/numeric.hpp"
#include "tracewise/solvers.hpp"
#include "tracewise/trace.hpp"
#include "tracewise/wanderer.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace tracewise;

// Values cross the boundary as JSON text; the Python side decodes them.
namespace {

TaskInstance load_instance(const std::string& text) {
    try {
        return instance_from_json(json::parse(text));
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, std::string("instance: ") + e.what());
    }
}

std::string generate(const std::string& kind, const std::map<std::string, std::int64_t>& size,
                     std::uint64_t seed) {
    return instance_to_json(generate_instance(parse_task_kind(kind), size, seed)).dump();
}

std::string solve(const std::string& instance) {
    auto inst = load_instance(instance);
    auto ref = canonical_trace(inst);
    return json{{"trace", ref.canonical_trace}, {"answer", answer_to_json(ref.final_answer)}}.dump();
}

std::string oracle(const std::string& instance) {
    return answer_to_json(brute_force_oracle(load_instance(instance))).dump();
}

std::string prompt(const std::string& instance, const std::string& template_dir) {
    return build_prompt(load_instance(instance), template_dir);
}

std::string parse(const std::string& kind, const std::string& text) {
    const auto block = extract_answer_block(text);
    const auto t = parse_trace(parse_task_kind(kind), block.payload);
    json dirs = json::array();
    for (const auto& d : t.directives)
        dirs.push_back({{"text", serialize_directive(d)}, {"span", {d.span.begin, d.span.end}}});
    json diags = json::array();
    for (const auto& d : t.diagnostics)
        diags.push_back({{"severity", d.severity == Severity::Fatal ? "fatal" : "warning"},
                         {"message", d.message},
                         {"span", {d.span.begin, d.span.end}}});
    return json{{"kind", kind},
                {"had_tags", block.had_tags},
                {"truncated", t.truncated},
                {"directives", dirs},
                {"diagnostics", diags},
                {"canonical", serialize_trace(t)}}
        .dump();
}

std::string audit(const std::string& instance, const std::string& raw, std::optional<std::string> thinking,
                  const std::string& model) {
    auto inst = load_instance(instance);
    auto v = audit_response(inst, reference_for_audit(inst), raw, thinking);
    return verdict_to_json(v, inst.instance_id, model).dump();
}

std::string audit_fixture_json(const std::string& fixture) {
    FixtureResult r;
    try {
        r = audit_fixture(json::parse(fixture));
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, std::string("fixture: ") + e.what());
    }
    auto j = verdict_to_json(r.verdict, r.id, r.model);
    json ann = json::array();
    for (auto k : r.annotated)
        ann.push_back(to_string(k));
    j["annotated"] = ann;
    j["annotated_present"] = r.annotated_present;
    return j.dump();
}

py::tuple verify24(const std::string& expr, const std::array<int, 4>& cards) {
    auto r = verify_expression_24(expr, cards);
    return py::make_tuple(format_rational(r.value), r.violations);
}

py::dict estimate_dict(const SuccessEstimate& e) {
    py::dict d;
    d["model"] = std::string(to_string(e.model));
    d["estimate"] = e.estimate;
    d["std_error"] = e.std_error;
    d["trials"] = e.trials;
    return d;
}

std::string campaign(const std::string& config, unsigned workers) {
    CampaignConfig c;
    try {
        c = config_from_json(json::parse(config));
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
    if (workers)
        c.workers = workers;
    auto r = run_campaign(c);
    return json{{"output_dir", c.output_dir},
                {"instances", r.instances},
                {"responses", r.responses},
                {"resumed", r.resumed},
                {"endpoint_calls", r.endpoint_calls},
                {"summary", summary_to_json(r.summary)}}
        .dump();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    static PyObject* error_type = py::exception<Error>(m, "TracewiseError", PyExc_ValueError).release().ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            // args are (message, code name)
            PyErr_SetObject(error_type, py::make_tuple(e.what(), std::string(to_string(e.code()))).ptr());
        }
    });

    m.def("generate", &generate, py::arg("kind"), py::arg("size"), py::arg("seed"));
    m.def("solve", &solve, py::arg("instance"));
    m.def("oracle", &oracle, py::arg("instance"));
    m.def("prompt", &prompt, py::arg("instance"), py::arg("template_dir") = "");
    m.def("parse", &parse, py::arg("kind"), py::arg("text"));
    m.def("audit", &audit, py::arg("instance"), py::arg("raw"), py::arg("thinking") = py::none(),
          py::arg("model") = "");
    m.def("audit_fixture", &audit_fixture_json, py::arg("fixture"));
    m.def("verify_expression_24", &verify24, py::arg("expr"), py::arg("cards"));
    m.def("success_probability", &success_probability, py::arg("d"), py::arg("m"), py::arg("q_w"));
    m.def("log_failure_probability", &log_failure_probability, py::arg("d"), py::arg("m"), py::arg("q_w"));
    m.def(
        "simulate_independent",
        [](int d, std::uint64_t mm, double q, std::uint64_t trials, std::uint64_t seed, unsigned workers) {
            SuccessEstimate e;
            {
                py::gil_scoped_release release;
                e = simulate_independent({d, mm, q, trials, seed}, workers);
            }
            return estimate_dict(e);
        },
        py::arg("d"), py::arg("m"), py::arg("q_w"), py::arg("trials"), py::arg("seed") = 0, py::arg("workers") = 0);
    m.def(
        "simulate_tree",
        [](int d, std::uint64_t mm, double p_w, std::uint64_t budget, std::uint64_t trials, std::uint64_t seed) {
            SuccessEstimate e;
            {
                py::gil_scoped_release release;
                e = simulate_tree(d, mm, p_w, budget, trials, seed);
            }
            return estimate_dict(e);
        },
        py::arg("d"), py::arg("m"), py::arg("p_w"), py::arg("budget"), py::arg("trials"), py::arg("seed") = 0);
    m.def(
        "plateau_scan",
        [](std::uint64_t mm, double q, double threshold) -> std::optional<std::pair<int, int>> {
            auto r = plateau_scan(mm, q, threshold);
            if (!r)
                return std::nullopt;
            return std::make_pair(r->lo, r->hi);
        },
        py::arg("m"), py::arg("q_w"), py::arg("threshold"));
    m.def(
        "run_campaign",
        [](const std::string& config, unsigned workers) {
            py::gil_scoped_release release;
            return campaign(config, workers);
        },
        py::arg("config"), py::arg("workers") = 0);
}
