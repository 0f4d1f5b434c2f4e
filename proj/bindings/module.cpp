#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "protoeval/dataset.hpp"
#include "protoeval/dsl.hpp"
#include "protoeval/gateway.hpp"
#include "protoeval/harness.hpp"
#include "protoeval/metrics.hpp"
#include "protoeval/retrieval.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace protoeval;

namespace {

dsl::PseudoProgram parse_program_or_throw(const std::string& text) {
    auto parsed = dsl::parse_program(text);
    if (!parsed.ok()) throw py::value_error(dsl::format_diagnostics(parsed.diagnostics));
    return *parsed.program;
}

dsl::FunctionLibrary parse_signatures_or_throw(const std::string& text) {
    auto parsed = dsl::parse_signatures(text);
    if (!parsed.ok()) throw py::value_error(dsl::format_diagnostics(parsed.diagnostics));
    return *parsed.library;
}

std::vector<data::ProtocolRecord> load_or_throw(const std::string& path) {
    auto loaded = data::load_dataset(path);
    if (!loaded.warnings.empty()) {
        py::module_::import("warnings")
            .attr("warn")(loaded.warnings.front() +
                          (loaded.warnings.size() > 1 ? " (and more)" : ""));
    }
    return std::move(loaded.records);
}

std::string run_suite_json(const std::string& dataset_path, const std::string& task,
                           const std::string& student_spec, const std::string& config_json) {
    auto records = load_or_throw(dataset_path);
    harness::TaskKind kind;
    if (task == "next-step")
        kind = harness::TaskKind::NextStep;
    else if (task == "generate")
        kind = harness::TaskKind::Generation;
    else if (task == "retrieve")
        kind = harness::TaskKind::Retrieval;
    else
        throw py::value_error("task must be next-step, generate, or retrieve");

    harness::TaskConfig config;
    json cfg = config_json.empty() ? json::object() : json::parse(config_json);
    config.shuffle = cfg.value("shuffle", false);
    config.feedback = cfg.value("feedback", false);
    config.runs = cfg.value("runs", 1);
    config.rng_seed = cfg.value("seed", 0ULL);
    config.distractor_protocols = cfg.value("k", 3);
    if (cfg.value("description", "original") == std::string("generated"))
        config.description_source = harness::DescriptionSource::Generated;
    if (cfg.value("distractors", "random") == std::string("nearest"))
        config.distractor_mode = harness::DistractorMode::Nearest;

    auto student = harness::make_student(student_spec, nullptr);
    harness::SuiteDeps deps;
    deps.embedder = [](const std::string& text) { return llm::hashed_embedding(text); };
    auto report = harness::run_suite(records, kind, *student, config, deps);
    report.document["dataset"] = dataset_path;
    return report.document.dump();
}

std::string dataset_stats_json(const std::string& path) {
    auto records = load_or_throw(path);
    return data::stats_to_json(data::compute_stats(records));
}

std::vector<std::pair<std::string, double>> nearest_protocols(const std::string& dataset_path,
                                                              const std::string& query,
                                                              std::size_t k) {
    auto records = load_or_throw(dataset_path);
    metrics::Embedder embed = [](const std::string& text) { return llm::hashed_embedding(text); };
    auto index = retrieval::build_index(records, embed);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& hit : retrieval::nearest(index, query, k, embed))
        out.emplace_back(hit.id, hit.cosine);
    return out;
}

const char* op_name(metrics::EditOp op) {
    switch (op) {
        case metrics::EditOp::Match: return "match";
        case metrics::EditOp::Substitute: return "substitute";
        case metrics::EditOp::Insert: return "insert";
        case metrics::EditOp::Delete: return "delete";
    }
    return "match";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Protocol-planning evaluation harness (C++ core)";

    py::class_<dsl::PseudoProgram>(m, "Program")
        .def("__len__", [](const dsl::PseudoProgram& p) { return p.size(); })
        .def("callees", &dsl::PseudoProgram::callee_names)
        .def("render", [](const dsl::PseudoProgram& p) { return dsl::render_program(p); })
        .def("__repr__", [](const dsl::PseudoProgram& p) {
            return "<Program with " + std::to_string(p.size()) + " calls>";
        });

    py::class_<dsl::FunctionLibrary>(m, "Library")
        .def("__len__", [](const dsl::FunctionLibrary& l) { return l.size(); })
        .def("names", &dsl::FunctionLibrary::names)
        .def("render", [](const dsl::FunctionLibrary& l) { return dsl::render_library(l); });

    m.def("parse_program", &parse_program_or_throw, py::arg("text"),
          "Parse pseudocode text; raises ValueError on diagnostics.");
    m.def("parse_signatures", &parse_signatures_or_throw, py::arg("text"),
          "Parse pseudofunction definitions; raises ValueError on diagnostics.");
    m.def(
        "validate",
        [](const dsl::PseudoProgram& program, const dsl::FunctionLibrary& library) {
            std::vector<std::tuple<std::string, int, std::string>> out;
            for (const auto& diag :
                 dsl::validate(program, library, dsl::ValidationPolicy::defaults()))
                out.emplace_back(std::string(dsl::to_string(diag.code)), diag.line, diag.message);
            return out;
        },
        py::arg("program"), py::arg("library"),
        "Validate a program against a library; returns (code, line, message) tuples.");

    m.def("sentence_bleu", &metrics::sentence_bleu, py::arg("candidate"), py::arg("reference"));
    m.def("function_accuracy",
          py::overload_cast<const std::vector<std::string>&, const std::vector<std::string>&>(
              &metrics::function_accuracy),
          py::arg("predicted"), py::arg("gold"));
    m.def(
        "multiset_function_pr",
        [](const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
            auto pr = metrics::multiset_function_pr(pred, gold);
            return std::make_pair(pr.precision, pr.recall);
        },
        py::arg("predicted"), py::arg("gold"));
    m.def(
        "levenshtein",
        [](const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
            auto result = metrics::levenshtein(pred, gold);
            std::vector<std::tuple<std::string, py::object, py::object>> steps;
            for (const auto& step : result.alignment)
                steps.emplace_back(
                    op_name(step.op),
                    step.pred_index ? py::cast(*step.pred_index) : py::none(),
                    step.gold_index ? py::cast(*step.gold_index) : py::none());
            return std::make_pair(result.distance, steps);
        },
        py::arg("predicted"), py::arg("gold"),
        "Edit distance over call symbols with one optimal alignment.");
    m.def("levenshtein_normalized", &metrics::levenshtein_normalized, py::arg("predicted"),
          py::arg("gold"));
    m.def(
        "retrieval_pr",
        [](const std::vector<std::string>& selected, const std::vector<std::string>& gold) {
            auto score = metrics::retrieval_pr(selected, gold);
            return std::make_pair(score.precision, score.recall);
        },
        py::arg("selected"), py::arg("gold"));
    m.def(
        "aggregate",
        [](const std::vector<double>& values) {
            auto stats = metrics::aggregate(values);
            return std::make_pair(stats.mean, stats.std_dev);
        },
        py::arg("values"), "Mean and sample standard deviation.");

    m.def("dataset_stats_json", &dataset_stats_json, py::arg("path"));
    m.def("run_suite_json", &run_suite_json, py::arg("dataset_path"), py::arg("task"),
          py::arg("student") = "oracle", py::arg("config_json") = "",
          "Offline evaluation (oracle or random student); returns the report as JSON text.");
    m.def("nearest_protocols", &nearest_protocols, py::arg("dataset_path"), py::arg("query"),
          py::arg("k") = 3);
}
