#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "protoeval/dataset.hpp"
#include "protoeval/dsl.hpp"
#include "protoeval/gateway.hpp"
#include "protoeval/harness.hpp"
#include "protoeval/metrics.hpp"
#include "protoeval/prompts.hpp"
#include "protoeval/retrieval.hpp"
#include "protoeval/rng.hpp"
#include "protoeval/teacher.hpp"

using nlohmann::json;
using namespace protoeval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFlagged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitProvider = 3;

struct CommonOptions {
    std::string dataset;
    std::string out;
    std::string config_path;
    std::string mode = "passthrough";
    std::string cassette;
    std::uint64_t seed = 0;
    int runs = 5;
    bool shuffle = false;
    bool feedback = false;
    std::string description = "original";
    std::string distractors = "random";
    int k = 3;
    std::string student = "oracle";
    std::string model = "gpt-4";
    std::string embedder = "hashed";
    std::string prompts_dir;
    bool verbose = false;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json config;
    in >> config;
    if (!config.is_object()) throw std::runtime_error("config file must hold a JSON object");
    return config;
}

template <typename T>
void config_fallback(const json& config, const CLI::Option* opt, T& var, const char* key) {
    if (opt && opt->count() > 0) return;  // flags win over config values
    if (config.contains(key)) var = config.at(key).get<T>();
}

struct OptionRefs {
    CLI::Option* dataset = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* mode = nullptr;
    CLI::Option* cassette = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* runs = nullptr;
    CLI::Option* shuffle = nullptr;
    CLI::Option* feedback = nullptr;
    CLI::Option* description = nullptr;
    CLI::Option* distractors = nullptr;
    CLI::Option* k = nullptr;
    CLI::Option* student = nullptr;
    CLI::Option* model = nullptr;
    CLI::Option* embedder = nullptr;
};

// shared flag set; individual subcommands use the subset they document
OptionRefs add_common_options(CLI::App* cmd, CommonOptions& opts, bool with_eval_flags) {
    OptionRefs refs;
    refs.dataset = cmd->add_option("--dataset", opts.dataset, "Dataset file or directory");
    refs.out = cmd->add_option("--out", opts.out, "Output file path");
    cmd->add_option("--config", opts.config_path, "JSON config file (flags take precedence)");
    refs.mode = cmd->add_option("--mode", opts.mode, "Gateway mode: record|replay|passthrough")
                    ->check(CLI::IsMember({"record", "replay", "passthrough"}));
    refs.cassette = cmd->add_option("--cassette", opts.cassette, "Cassette file (JSONL)");
    refs.seed = cmd->add_option("--seed", opts.seed, "Seed for all randomness in the run");
    cmd->add_option("--prompts", opts.prompts_dir, "Directory overriding prompt templates");
    cmd->add_flag("--verbose", opts.verbose, "Progress output on stderr");
    if (with_eval_flags) {
        refs.runs = cmd->add_option("--runs", opts.runs, "Independent repetitions");
        refs.shuffle = cmd->add_flag("--shuffle", opts.shuffle, "Shuffle the function library");
        refs.feedback = cmd->add_flag("--feedback", opts.feedback, "Enable the error feedback loop");
        refs.description =
            cmd->add_option("--description", opts.description, "original|generated")
                ->check(CLI::IsMember({"original", "generated"}));
        refs.distractors = cmd->add_option("--distractors", opts.distractors, "random|nearest")
                               ->check(CLI::IsMember({"random", "nearest"}));
        refs.k = cmd->add_option("--k", opts.k, "Distractor protocol count");
        refs.student =
            cmd->add_option("--student", opts.student, "Student: live:<model>|oracle|random");
        refs.embedder = cmd->add_option("--embedder", opts.embedder,
                                        "Embedder: hashed|live:<model>");
    }
    refs.model = cmd->add_option("--model", opts.model, "Chat model id for teacher/judge/agent");
    return refs;
}

void apply_config(const OptionRefs& refs, CommonOptions& target) {
    json config = load_config(target.config_path);
    config_fallback(config, refs.dataset, target.dataset, "dataset");
    config_fallback(config, refs.out, target.out, "out");
    config_fallback(config, refs.mode, target.mode, "mode");
    config_fallback(config, refs.cassette, target.cassette, "cassette");
    config_fallback(config, refs.seed, target.seed, "seed");
    config_fallback(config, refs.runs, target.runs, "runs");
    config_fallback(config, refs.shuffle, target.shuffle, "shuffle");
    config_fallback(config, refs.feedback, target.feedback, "feedback");
    config_fallback(config, refs.description, target.description, "description");
    config_fallback(config, refs.distractors, target.distractors, "distractors");
    config_fallback(config, refs.k, target.k, "k");
    config_fallback(config, refs.student, target.student, "student");
    config_fallback(config, refs.model, target.model, "model");
    config_fallback(config, refs.embedder, target.embedder, "embedder");
}

std::unique_ptr<llm::Gateway> make_gateway(const CommonOptions& opts, bool needs_provider) {
    llm::GatewayConfig config;
    auto mode = llm::gateway_mode_from(opts.mode);
    if (!mode) throw std::invalid_argument("unknown gateway mode '" + opts.mode + "'");
    config.mode = *mode;
    if (!opts.cassette.empty()) config.cassette_path = opts.cassette;
    std::shared_ptr<llm::Provider> provider;
    if (config.mode != llm::GatewayMode::Replay && needs_provider)
        provider = std::make_shared<llm::HttpProvider>();
    return std::make_unique<llm::Gateway>(config, provider);
}

metrics::Embedder make_embedder(const CommonOptions& opts, llm::Gateway* gateway) {
    if (opts.embedder == "hashed")
        return [](const std::string& text) { return llm::hashed_embedding(text); };
    if (opts.embedder.rfind("live:", 0) == 0) {
        std::string model = opts.embedder.substr(5);
        if (model.empty() || !gateway)
            throw std::invalid_argument("live embedder needs a model id and gateway");
        return [gateway, model](const std::string& text) {
            return gateway->embed({model, {text}}).front();
        };
    }
    throw std::invalid_argument("unknown embedder '" + opts.embedder +
                                "' (expected hashed or live:<model>)");
}

std::vector<data::ProtocolRecord> load_records(const CommonOptions& opts) {
    if (opts.dataset.empty()) throw std::invalid_argument("--dataset is required");
    auto loaded = data::load_dataset(opts.dataset);
    for (const auto& warning : loaded.warnings) std::cerr << "warning: " << warning << '\n';
    return std::move(loaded.records);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

teacher::ChatFn chat_through(llm::Gateway& gateway) {
    return [&gateway](const llm::ChatRequest& request) { return gateway.chat(request); };
}

// --- subcommand bodies -------------------------------------------------------

int cmd_stats(const CommonOptions& opts) {
    auto records = load_records(opts);
    auto stats = data::compute_stats(records);
    write_text(opts.out, data::stats_to_json(stats) + "\n");
    return kExitOk;
}

int cmd_filter(const CommonOptions& opts, const std::string& rejected_path) {
    if (opts.dataset.empty()) throw std::invalid_argument("--dataset is required");
    auto raw = data::load_raw_protocols(opts.dataset);
    auto result = data::filter_protocols(raw);
    if (opts.out.empty()) throw std::invalid_argument("--out is required");
    data::write_raw_protocols(result.kept, opts.out);
    json rejected = json::array();
    for (const auto& rejection : result.rejected) {
        std::cerr << "rejected " << rejection.record.id << ": " << rejection.reason << '\n';
        rejected.push_back({{"id", rejection.record.id}, {"reason", rejection.reason}});
    }
    if (!rejected_path.empty()) write_text(rejected_path, rejected.dump(2) + "\n");
    std::cerr << "kept " << result.kept.size() << " of " << raw.size() << " protocols\n";
    return kExitOk;
}

int cmd_translate(const CommonOptions& opts, int max_rounds, bool self_check) {
    if (opts.dataset.empty() || opts.out.empty())
        throw std::invalid_argument("--dataset and --out are required");
    auto raw = data::load_raw_protocols(opts.dataset);
    auto gateway = make_gateway(opts, true);
    teacher::TranslationPolicy policy;
    policy.max_feedback_rounds = max_rounds;
    policy.include_self_check = self_check;
    policy.model_id = opts.model;

    std::vector<data::ProtocolRecord> records;
    bool any_failed = false;
    for (const auto& protocol : raw) {
        if (opts.verbose) std::cerr << "translating " << protocol.id << "...\n";
        try {
            auto result = teacher::translate_protocol(protocol.title, protocol.description,
                                                      protocol.steps, chat_through(*gateway),
                                                      policy);
            data::ProtocolRecord record;
            record.id = protocol.id;
            record.title = protocol.title;
            record.description = protocol.description;
            record.steps = protocol.steps;
            record.library = std::move(result.library);
            record.gold_program = std::move(result.program);
            records.push_back(std::move(record));
        } catch (const teacher::TranslationFailed& e) {
            any_failed = true;
            std::cerr << "translation failed for " << protocol.id << ": " << e.what() << '\n';
        }
    }
    data::write_dataset(records, opts.out);
    std::cerr << "translated " << records.size() << " of " << raw.size() << " protocols\n";
    return any_failed ? kExitFlagged : kExitOk;
}

int cmd_describe(const CommonOptions& opts) {
    if (opts.dataset.empty() || opts.out.empty())
        throw std::invalid_argument("--dataset and --out are required");
    auto records = load_records(opts);
    auto gateway = make_gateway(opts, true);
    for (auto& record : records) {
        if (opts.verbose) std::cerr << "describing " << record.id << "...\n";
        record.generated_description =
            teacher::generate_description(record.steps, chat_through(*gateway), opts.model);
    }
    data::write_dataset(records, opts.out);
    return kExitOk;
}

int cmd_eval(const CommonOptions& opts, harness::TaskKind task) {
    auto records = load_records(opts);
    bool live_student = opts.student.rfind("live:", 0) == 0;
    bool live_embedder = opts.embedder.rfind("live:", 0) == 0;
    std::unique_ptr<llm::Gateway> gateway;
    if (live_student || live_embedder || !opts.cassette.empty())
        gateway = make_gateway(opts, live_student || live_embedder);

    auto student = harness::make_student(opts.student, gateway.get());

    harness::TaskConfig config;
    config.shuffle = opts.shuffle;
    config.feedback = opts.feedback;
    config.description_source = opts.description == "generated"
                                    ? harness::DescriptionSource::Generated
                                    : harness::DescriptionSource::Original;
    config.distractor_mode = opts.distractors == "nearest" ? harness::DistractorMode::Nearest
                                                           : harness::DistractorMode::Random;
    config.distractor_protocols = opts.k;
    config.runs = opts.runs;
    config.rng_seed = opts.seed;

    harness::SuiteDeps deps;
    deps.embedder = make_embedder(opts, gateway.get());

    auto report = harness::run_suite(records, task, *student, config, deps);
    report.document["dataset"] = opts.dataset;
    if (!opts.cassette.empty()) report.document["cassette"] = opts.cassette;
    std::string out = opts.out.empty() ? "report.json" : opts.out;
    harness::write_report(report, out);
    if (opts.verbose) std::cerr << "report written to " << out << '\n';
    return report.any_flagged ? kExitFlagged : kExitOk;
}

int cmd_judge(const CommonOptions& opts, const std::string& predictions_path) {
    if (predictions_path.empty()) throw std::invalid_argument("--predictions is required");
    auto records = load_records(opts);
    std::ifstream in(predictions_path);
    if (!in) throw std::runtime_error("cannot open predictions file " + predictions_path);
    json predictions;
    in >> predictions;

    auto gateway = make_gateway(opts, true);
    rng::Stream base(opts.seed);

    json per_protocol = json::array();
    int gold = 0, predicted = 0, abstained = 0;
    for (const auto& record : records) {
        if (!predictions.contains(record.id)) continue;
        auto parsed = dsl::parse_program(predictions[record.id].get<std::string>());
        if (!parsed.ok()) {
            std::cerr << "skipping " << record.id << ": prediction does not parse\n";
            continue;
        }
        auto outcome = harness::pairwise_judge_task(record, *parsed.program,
                                                    chat_through(*gateway), opts.model,
                                                    base.derive(record.id));
        const char* preference = "abstain";
        if (outcome.preference == harness::JudgePreference::Gold) {
            preference = "gold";
            ++gold;
        } else if (outcome.preference == harness::JudgePreference::Predicted) {
            preference = "predicted";
            ++predicted;
        } else {
            ++abstained;
        }
        per_protocol.push_back(
            {{"id", record.id}, {"preference", preference}, {"gold_first", outcome.gold_first}});
    }

    json doc;
    doc["per_protocol"] = per_protocol;
    doc["gold_preferred"] = gold;
    doc["predicted_preferred"] = predicted;
    doc["abstained"] = abstained;
    int decisive = gold + predicted;
    doc["predicted_rate"] =
        decisive > 0 ? json(static_cast<double>(predicted) / decisive) : json(nullptr);
    write_text(opts.out.empty() ? "judge.json" : opts.out, doc.dump(2) + "\n");
    return kExitOk;
}

int cmd_index_build(const CommonOptions& opts) {
    if (opts.out.empty()) throw std::invalid_argument("--out is required");
    auto records = load_records(opts);
    std::unique_ptr<llm::Gateway> gateway;
    if (opts.embedder.rfind("live:", 0) == 0) gateway = make_gateway(opts, true);
    auto index = retrieval::build_index(records, make_embedder(opts, gateway.get()));
    retrieval::save_index(index, opts.out);
    std::cerr << "indexed " << index.entries.size() << " protocols (dimension "
              << index.dimension << ")\n";
    return kExitOk;
}

int cmd_index_query(const CommonOptions& opts, const std::string& index_path,
                    const std::string& query) {
    if (index_path.empty() || query.empty())
        throw std::invalid_argument("--index and --query are required");
    auto index = retrieval::load_index(index_path);
    std::unique_ptr<llm::Gateway> gateway;
    if (opts.embedder.rfind("live:", 0) == 0) gateway = make_gateway(opts, true);
    auto hits = retrieval::nearest(index, query, static_cast<std::size_t>(opts.k),
                                   make_embedder(opts, gateway.get()));
    json out = json::array();
    for (const auto& hit : hits) out.push_back({{"id", hit.id}, {"cosine", hit.cosine}});
    write_text(opts.out, out.dump(2) + "\n");
    return kExitOk;
}

int cmd_agent_run(const CommonOptions& opts, const std::string& goal,
                  const std::string& index_path, int max_tool_calls) {
    if (goal.empty() || index_path.empty())
        throw std::invalid_argument("--goal and --index are required");
    auto records = load_records(opts);
    auto index = retrieval::load_index(index_path);
    auto gateway = make_gateway(opts, true);
    retrieval::AgentOptions agent_options;
    agent_options.model_id = opts.model;
    agent_options.max_tool_calls = max_tool_calls;
    try {
        auto trace = retrieval::agent_generate(goal, index, records, chat_through(*gateway),
                                               make_embedder(opts, gateway.get()), agent_options);
        write_text(opts.out.empty() ? "trace.json" : opts.out,
                   retrieval::trace_to_json(trace) + "\n");
        return kExitOk;
    } catch (const retrieval::AgentFailed& e) {
        std::cerr << "agent failed: " << e.what() << '\n';
        if (!e.diagnostics.empty())
            std::cerr << dsl::format_diagnostics(e.diagnostics) << '\n';
        return kExitFlagged;
    }
}

int cmd_report_render(const CommonOptions& opts, const std::string& report_path) {
    if (report_path.empty()) throw std::invalid_argument("--report is required");
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot open report file " + report_path);
    json report;
    in >> report;
    write_text(opts.out, harness::render_report_markdown(report));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"protoeval: protocol-planning evaluation harness"};
    app.require_subcommand(1);

    CommonOptions opts;
    int exit_code = kExitOk;
    std::string rejected_path, predictions_path, index_path, query, goal, report_path;
    int max_rounds = 3, max_tool_calls = 5;
    bool self_check = true;

    auto dispatch = [&](auto fn) {
        return [&, fn]() {
            if (!opts.prompts_dir.empty()) prompts::load_overrides(opts.prompts_dir);
            exit_code = fn();
        };
    };

    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    auto stats_refs = add_common_options(stats, opts, false);
    stats->callback(dispatch([&] {
        apply_config(stats_refs, opts);
        return cmd_stats(opts);
    }));

    auto* filter = app.add_subcommand("filter", "Apply the pre-publication filtering rules");
    auto filter_refs = add_common_options(filter, opts, false);
    filter->add_option("--rejected", rejected_path, "Write rejections with reasons here");
    filter->callback(dispatch([&] {
        apply_config(filter_refs, opts);
        return cmd_filter(opts, rejected_path);
    }));

    auto* translate = app.add_subcommand("translate", "Teacher translation to pseudocode");
    auto translate_refs = add_common_options(translate, opts, false);
    translate->add_option("--max-rounds", max_rounds, "Feedback round limit");
    translate->add_flag("--self-check,!--no-self-check", self_check,
                        "Run (or skip) the final self-check round");
    translate->callback(dispatch([&] {
        apply_config(translate_refs, opts);
        return cmd_translate(opts, max_rounds, self_check);
    }));

    auto* describe = app.add_subcommand("describe", "Generate machine descriptions");
    auto describe_refs = add_common_options(describe, opts, false);
    describe->callback(dispatch([&] {
        apply_config(describe_refs, opts);
        return cmd_describe(opts);
    }));

    auto* eval = app.add_subcommand("eval", "Run an evaluation task");
    eval->require_subcommand(1);
    for (auto [name, task] : {std::pair{"next-step", harness::TaskKind::NextStep},
                              std::pair{"generate", harness::TaskKind::Generation},
                              std::pair{"retrieve", harness::TaskKind::Retrieval}}) {
        auto* sub = eval->add_subcommand(name, "");
        auto refs = add_common_options(sub, opts, true);
        harness::TaskKind kind = task;
        sub->callback(dispatch([&, refs, kind] {
            apply_config(refs, opts);
            return cmd_eval(opts, kind);
        }));
    }

    auto* judge = app.add_subcommand("judge", "Pairwise gold-vs-predicted judging");
    auto judge_refs = add_common_options(judge, opts, false);
    judge->add_option("--predictions", predictions_path,
                      "JSON object mapping protocol id to pseudocode text");
    judge->callback(dispatch([&] {
        apply_config(judge_refs, opts);
        return cmd_judge(opts, predictions_path);
    }));

    auto* index = app.add_subcommand("index", "Embedding index operations");
    index->require_subcommand(1);
    auto* index_build = index->add_subcommand("build", "Build an index over descriptions");
    auto index_build_refs = add_common_options(index_build, opts, false);
    index_build_refs.embedder =
        index_build->add_option("--embedder", opts.embedder, "Embedder: hashed|live:<model>");
    index_build->callback(dispatch([&] {
        apply_config(index_build_refs, opts);
        return cmd_index_build(opts);
    }));
    auto* index_query = index->add_subcommand("query", "Query an index");
    auto index_query_refs = add_common_options(index_query, opts, false);
    index_query->add_option("--index", index_path, "Index file");
    index_query->add_option("--query", query, "Query text");
    index_query_refs.k = index_query->add_option("--k", opts.k, "Result count");
    index_query_refs.embedder =
        index_query->add_option("--embedder", opts.embedder, "Embedder: hashed|live:<model>");
    index_query->callback(dispatch([&] {
        apply_config(index_query_refs, opts);
        return cmd_index_query(opts, index_path, query);
    }));

    auto* agent = app.add_subcommand("agent", "Retrieval-augmented agent");
    agent->require_subcommand(1);
    auto* agent_run = agent->add_subcommand("run", "Compose a new protocol from retrieved functions");
    auto agent_refs = add_common_options(agent_run, opts, false);
    agent_run->add_option("--goal", goal, "Target protocol description");
    agent_run->add_option("--index", index_path, "Index file");
    agent_run->add_option("--max-tool-calls", max_tool_calls, "Search budget");
    agent_refs.embedder =
        agent_run->add_option("--embedder", opts.embedder, "Embedder: hashed|live:<model>");
    agent_run->callback(dispatch([&] {
        apply_config(agent_refs, opts);
        return cmd_agent_run(opts, goal, index_path, max_tool_calls);
    }));

    auto* report = app.add_subcommand("report", "Report utilities");
    report->require_subcommand(1);
    auto* report_render = report->add_subcommand("render", "Render a report as a markdown table");
    auto report_refs = add_common_options(report_render, opts, false);
    report_render->add_option("--report", report_path, "Report JSON file");
    report_render->callback(dispatch([&] {
        apply_config(report_refs, opts);
        return cmd_report_render(opts, report_path);
    }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const llm::CassetteMiss& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitProvider;
    } catch (const llm::ProviderError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitProvider;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return exit_code;
}
