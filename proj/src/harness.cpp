#include "protoeval/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "protoeval/prompts.hpp"
#include "protoeval/teacher.hpp"

using nlohmann::json;

namespace protoeval::harness {

std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::NextStep: return "next-step";
        case TaskKind::Generation: return "generate";
        case TaskKind::Retrieval: return "retrieve";
    }
    return "next-step";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_fences(const std::string& text) {
    std::size_t open = text.find("```");
    if (open == std::string::npos) return trim(text);
    std::size_t start = text.find('\n', open);
    if (start == std::string::npos) return trim(text);
    ++start;
    std::size_t close = text.find("```", start);
    if (close == std::string::npos) return trim(text.substr(start));
    return trim(text.substr(start, close - start));
}

// library text as shown to the student; permutation drawn fresh per
// protocol per run
std::string library_prompt_text(const dsl::FunctionLibrary& library, bool shuffle,
                                rng::Stream& stream) {
    if (!shuffle) return dsl::render_library(library);
    dsl::FunctionLibrary shuffled = library;
    stream.shuffle(shuffled.signatures);
    return dsl::render_library(shuffled);
}

const std::string& description_for(const data::ProtocolRecord& record, const TaskConfig& config) {
    return record.description_for(config.description_source == DescriptionSource::Generated);
}

}  // namespace

// --- students ----------------------------------------------------------------

std::string OracleStudent::next_call(const NextStepContext& context) {
    return dsl::render_call(context.record->gold_program.calls.at(context.step_index));
}

std::string OracleStudent::full_program(const GenerationContext& context) {
    return dsl::render_program(context.record->gold_program);
}

std::vector<std::string> OracleStudent::select_functions(const RetrievalContext& context) {
    return context.record->library.names();
}

void RandomStudent::on_run_start(std::uint64_t run_seed) { stream_ = rng::Stream(run_seed); }

std::string RandomStudent::next_call(const NextStepContext& context) {
    auto names = context.record->library.names();
    if (names.empty()) return {};
    return names[stream_.below(names.size())] + "()";
}

std::string RandomStudent::full_program(const GenerationContext& context) {
    auto names = context.record->library.names();
    if (names.empty()) return {};
    std::size_t length = 1 + stream_.below(2 * names.size());
    std::ostringstream out;
    for (std::size_t i = 0; i < length; ++i) {
        if (i) out << '\n';
        out << names[stream_.below(names.size())] << "()";
    }
    return out.str();
}

std::vector<std::string> RandomStudent::select_functions(const RetrievalContext& context) {
    std::vector<std::string> selected;
    for (const auto& name : context.candidate_names)
        if (stream_.next_bool()) selected.push_back(name);
    return selected;
}

LiveStudent::LiveStudent(llm::Gateway& gateway, std::string model_id)
    : gateway_(gateway), model_id_(std::move(model_id)) {}

std::string LiveStudent::ask(const std::string& prompt) {
    llm::ChatRequest request;
    request.model_id = model_id_;
    request.temperature = 0.0;
    request.messages.push_back({"user", prompt});
    return gateway_.chat(request);
}

std::string LiveStudent::next_call(const NextStepContext& context) {
    std::string prompt = prompts::fill(
        prompts::get("next_step"),
        {{"title", context.title},
         {"description", context.description},
         {"functions", context.library_text},
         {"prefix", context.prefix_text.empty() ? "(no lines yet)" : context.prefix_text}});
    return strip_fences(ask(prompt));
}

std::string LiveStudent::full_program(const GenerationContext& context) {
    std::string prompt;
    if (context.round == 1) {
        prompt = prompts::fill(prompts::get("generate"), {{"title", context.title},
                                                          {"description", context.description},
                                                          {"functions", context.library_text}});
    } else {
        prompt = prompts::fill(prompts::get("generate"), {{"title", context.title},
                                                          {"description", context.description},
                                                          {"functions", context.library_text}});
        prompt += "\n\nYour previous attempt:\n" + context.previous_attempt + "\n\n";
        prompt += prompts::fill(prompts::get("generate_feedback"), {{"errors", context.errors}});
    }
    return strip_fences(ask(prompt));
}

std::vector<std::string> LiveStudent::select_functions(const RetrievalContext& context) {
    std::string prompt = prompts::fill(prompts::get("retrieve"),
                                       {{"title", context.title},
                                        {"description", context.description},
                                        {"functions", context.candidates_text}});
    std::string reply = strip_fences(ask(prompt));
    std::vector<std::string> names;
    std::istringstream lines(reply);
    std::string line;
    while (std::getline(lines, line)) {
        std::string cleaned;
        for (char c : line)
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') cleaned.push_back(c);
            else if (!cleaned.empty()) break;
        // drop list numbering like "1" from "1. MixSample"
        if (!cleaned.empty() && std::isdigit(static_cast<unsigned char>(cleaned[0]))) {
            std::string rest = trim(line);
            std::size_t at = rest.find_first_not_of("0123456789.)- \t");
            if (at == std::string::npos) continue;
            cleaned.clear();
            for (std::size_t i = at; i < rest.size(); ++i) {
                char c = rest[i];
                if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') cleaned.push_back(c);
                else break;
            }
        }
        if (!cleaned.empty()) names.push_back(cleaned);
    }
    return names;
}

std::unique_ptr<Student> make_student(const std::string& spec, llm::Gateway* gateway) {
    if (spec == "oracle") return std::make_unique<OracleStudent>();
    if (spec == "random") return std::make_unique<RandomStudent>();
    if (spec.rfind("live:", 0) == 0) {
        std::string model = spec.substr(5);
        if (model.empty()) throw std::invalid_argument("live student needs a model id");
        if (!gateway) throw std::invalid_argument("live student needs a gateway");
        return std::make_unique<LiveStudent>(*gateway, model);
    }
    throw std::invalid_argument("unknown student spec '" + spec +
                                "' (expected oracle, random, or live:<model>)");
}

// --- tasks --------------------------------------------------------------------

metrics::NextStepScore next_step_task(const data::ProtocolRecord& record, Student& student,
                                      const TaskConfig& config, rng::Stream stream,
                                      const metrics::Embedder& embedder,
                                      std::vector<std::string>* unparseable) {
    const auto& gold = record.gold_program;
    if (gold.empty()) throw std::invalid_argument("next_step_task: empty gold program");

    rng::Stream shuffle_stream = stream.derive("library_shuffle");
    std::string library_text = library_prompt_text(record.library, config.shuffle, shuffle_stream);

    std::size_t correct = 0;
    std::vector<double> precisions, recalls;
    std::vector<std::pair<std::string, std::string>> value_pairs;

    for (std::size_t i = 0; i < gold.calls.size(); ++i) {
        NextStepContext context;
        context.record = &record;
        context.step_index = i;
        context.title = record.title;
        context.description = description_for(record, config);
        context.library_text = library_text;
        dsl::PseudoProgram prefix;
        prefix.calls.assign(gold.calls.begin(), gold.calls.begin() + static_cast<long>(i));
        context.prefix_text = dsl::render_program(prefix);

        std::string reply = student.next_call(context);
        auto parsed = dsl::parse_single_call(reply);
        if (!parsed.ok()) {
            if (unparseable)
                unparseable->push_back("step " + std::to_string(i + 1) + ": " +
                                       parsed.diagnostic->message);
            continue;  // counts as an incorrect step
        }
        const auto& gold_call = gold.calls[i];
        if (parsed.call->callee != gold_call.callee) continue;
        ++correct;

        auto pr = metrics::argument_name_pr(*parsed.call, gold_call);
        precisions.push_back(pr.precision);
        recalls.push_back(pr.recall);
        for (const auto& gold_arg : gold_call.args) {
            const auto* pred_arg = parsed.call->find_arg_ci(gold_arg.name);
            if (pred_arg)
                value_pairs.emplace_back(pred_arg->value.value_text(),
                                         gold_arg.value.value_text());
        }
    }

    metrics::NextStepScore score;
    score.function_accuracy =
        static_cast<double>(correct) / static_cast<double>(gold.calls.size());
    if (!precisions.empty()) {
        score.arg_name_precision = metrics::aggregate(precisions).mean;
        score.arg_name_recall = metrics::aggregate(recalls).mean;
    }
    score.arg_value_bleu = metrics::argument_value_bleu(value_pairs);
    if (embedder && !value_pairs.empty())
        score.arg_value_embedscore = metrics::argument_value_embedscore(value_pairs, embedder);
    return score;
}

metrics::GenerationScore generation_task(const data::ProtocolRecord& record, Student& student,
                                         const TaskConfig& config, rng::Stream stream,
                                         const metrics::Embedder& embedder) {
    const auto& gold = record.gold_program;
    if (gold.empty()) throw std::invalid_argument("generation_task: empty gold program");

    rng::Stream shuffle_stream = stream.derive("library_shuffle");

    GenerationContext context;
    context.record = &record;
    context.title = record.title;
    context.description = description_for(record, config);
    context.library_text = library_prompt_text(record.library, config.shuffle, shuffle_stream);

    int max_rounds = config.feedback ? config.feedback_max_rounds : 1;
    std::optional<dsl::PseudoProgram> program;

    for (int round = 1; round <= max_rounds; ++round) {
        context.round = round;
        std::string reply = student.full_program(context);
        auto parsed = dsl::parse_program(reply);

        program.reset();  // only the final attempt is scored
        std::vector<dsl::Diagnostic> diagnostics = parsed.diagnostics;
        if (parsed.ok()) {
            if (parsed.program->empty()) {
                diagnostics.push_back(
                    {dsl::DiagnosticCode::Syntax, 1, "output contained no pseudocode statements"});
            } else {
                program = *parsed.program;
                // the generation loop checks syntax and undefined functions only
                auto structural = dsl::validate(*parsed.program, record.library,
                                                dsl::ValidationPolicy::structural_only());
                diagnostics.insert(diagnostics.end(), structural.begin(), structural.end());
            }
        }

        if (diagnostics.empty() || round == max_rounds) break;
        context.previous_attempt = reply;
        context.errors = teacher::format_feedback(diagnostics);
    }

    metrics::GenerationScore score;
    if (!program) {
        // unusable output: no credit, every gold call counts as deleted
        score.function_precision = 0.0;
        score.function_recall = 0.0;
        score.levenshtein_normalized = 1.0;
        score.flagged = true;
        return score;
    }

    auto pr = metrics::multiset_function_pr(*program, gold);
    score.function_precision = pr.precision;
    score.function_recall = pr.recall;
    score.levenshtein_normalized =
        metrics::levenshtein_normalized(program->callee_names(), gold.callee_names());

    auto alignment = metrics::levenshtein(program->callee_names(), gold.callee_names());
    std::vector<double> precisions, recalls;
    for (const auto& step : alignment.alignment) {
        if (step.op != metrics::EditOp::Match) continue;
        auto call_pr = metrics::argument_name_pr(program->calls[*step.pred_index],
                                                 gold.calls[*step.gold_index]);
        precisions.push_back(call_pr.precision);
        recalls.push_back(call_pr.recall);
    }
    if (!precisions.empty()) {
        score.arg_name_precision = metrics::aggregate(precisions).mean;
        score.arg_name_recall = metrics::aggregate(recalls).mean;
    }
    auto value_pairs = metrics::generation_argument_pairs(*program, gold);
    score.arg_value_bleu = metrics::argument_value_bleu(value_pairs);
    if (embedder && !value_pairs.empty())
        score.arg_value_embedscore = metrics::argument_value_embedscore(value_pairs, embedder);
    return score;
}

metrics::RetrievalScore retrieval_task(const data::ProtocolRecord& record,
                                       const std::vector<data::ProtocolRecord>& corpus,
                                       Student& student, const TaskConfig& config,
                                       rng::Stream stream,
                                       const retrieval::EmbeddingIndex* nearest_index) {
    std::vector<const data::ProtocolRecord*> others;
    for (const auto& candidate : corpus)
        if (candidate.id != record.id) others.push_back(&candidate);
    std::size_t k = static_cast<std::size_t>(config.distractor_protocols);
    if (others.size() < k)
        throw std::invalid_argument("retrieval_task: corpus has fewer than k other protocols");

    std::vector<const data::ProtocolRecord*> distractors;
    if (config.distractor_mode == DistractorMode::Random) {
        rng::Stream pick = stream.derive("distractors");
        pick.shuffle(others);
        distractors.assign(others.begin(), others.begin() + static_cast<long>(k));
    } else {
        if (!nearest_index)
            throw std::invalid_argument("retrieval_task: nearest mode needs an embedding index");
        // self is in the index; ask for one extra and drop it
        auto hits = retrieval::nearest(*nearest_index, record.description, k + 1,
                                       [&](const std::string& text) {
                                           for (const auto& entry : nearest_index->entries)
                                               if (entry.description == text) return entry.vector;
                                           throw std::runtime_error(
                                               "retrieval_task: query not in index");
                                       });
        for (const auto& hit : hits) {
            if (hit.id == record.id) continue;
            for (const auto* other : others)
                if (other->id == hit.id) {
                    distractors.push_back(other);
                    break;
                }
            if (distractors.size() == k) break;
        }
    }

    dsl::FunctionLibrary candidates = record.library;
    for (const auto* distractor : distractors)
        for (const auto& sig : distractor->library.signatures)
            if (!candidates.find(sig.name)) candidates.signatures.push_back(sig);

    rng::Stream order = stream.derive("candidate_order");
    order.shuffle(candidates.signatures);

    RetrievalContext context;
    context.record = &record;
    context.title = record.title;
    context.description = description_for(record, config);
    context.candidates_text = dsl::render_library(candidates);
    context.candidate_names = candidates.names();

    auto selected = student.select_functions(context);
    auto score = metrics::retrieval_pr(selected, record.library.names());
    return score;
}

JudgeOutcome pairwise_judge_task(const data::ProtocolRecord& record,
                                 const dsl::PseudoProgram& predicted, const ChatFn& judge,
                                 const std::string& model_id, rng::Stream stream) {
    JudgeOutcome outcome;
    outcome.gold_first = stream.next_bool();

    std::string gold_text = dsl::render_program(record.gold_program);
    std::string predicted_text = dsl::render_program(predicted);

    llm::ChatRequest request;
    request.model_id = model_id;
    request.temperature = 0.0;
    request.messages.push_back(
        {"user",
         prompts::fill(prompts::get("judge"),
                       {{"description", record.description},
                        {"functions", dsl::render_library(record.library)},
                        {"program_a", outcome.gold_first ? gold_text : predicted_text},
                        {"program_b", outcome.gold_first ? predicted_text : gold_text}})});

    std::string reply = judge(request);

    // first isolated A or B decides; anything else is an abstention
    std::optional<char> letter;
    for (std::size_t i = 0; i < reply.size(); ++i) {
        char c = reply[i];
        if (c != 'A' && c != 'a' && c != 'B' && c != 'b') continue;
        bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(reply[i - 1]));
        bool right_ok =
            i + 1 >= reply.size() || !std::isalnum(static_cast<unsigned char>(reply[i + 1]));
        if (left_ok && right_ok) {
            letter = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            break;
        }
    }
    if (!letter) return outcome;

    bool chose_first = *letter == 'A';
    bool chose_gold = chose_first == outcome.gold_first;
    outcome.preference = chose_gold ? JudgePreference::Gold : JudgePreference::Predicted;
    return outcome;
}

// --- suite --------------------------------------------------------------------

namespace {

void set_optional(json& obj, const char* key, const std::optional<double>& value) {
    obj[key] = value ? json(*value) : json(nullptr);
}

// collects per-protocol values, skipping absent metrics
struct MetricPool {
    std::map<std::string, std::vector<double>> values;

    void add(const std::string& key, double v) { values[key].push_back(v); }
    void add(const std::string& key, const std::optional<double>& v) {
        if (v) values[key].push_back(*v);
    }

    json means() const {
        json out;
        for (const auto& [key, list] : values)
            out[key] = list.empty() ? json(nullptr) : json(metrics::aggregate(list).mean);
        return out;
    }
};

json config_json(TaskKind task, const TaskConfig& config) {
    json out;
    out["shuffle"] = config.shuffle;
    out["feedback"] = config.feedback;
    out["description"] =
        config.description_source == DescriptionSource::Generated ? "generated" : "original";
    out["runs"] = config.runs;
    out["seed"] = config.rng_seed;
    out["feedback_max_rounds"] = config.feedback_max_rounds;
    if (task == TaskKind::Retrieval) {
        out["distractors"] =
            config.distractor_mode == DistractorMode::Nearest ? "nearest" : "random";
        out["k"] = config.distractor_protocols;
    }
    return out;
}

const std::vector<std::string>& metric_keys(TaskKind task) {
    static const std::vector<std::string> next_step = {
        "function_accuracy", "arg_name_precision", "arg_name_recall", "arg_value_bleu",
        "arg_value_embedscore"};
    static const std::vector<std::string> generation = {
        "function_precision", "function_recall",  "levenshtein_normalized",
        "arg_name_precision", "arg_name_recall",  "arg_value_bleu",
        "arg_value_embedscore"};
    static const std::vector<std::string> retrieval = {"precision", "recall"};
    switch (task) {
        case TaskKind::NextStep: return next_step;
        case TaskKind::Generation: return generation;
        case TaskKind::Retrieval: return retrieval;
    }
    return next_step;
}

}  // namespace

RunReport run_suite(const std::vector<data::ProtocolRecord>& records, TaskKind task,
                    Student& student, const TaskConfig& config, const SuiteDeps& deps) {
    if (records.empty()) throw std::invalid_argument("run_suite: no records");
    if (config.runs < 1) throw std::invalid_argument("run_suite: runs must be >= 1");

    std::optional<retrieval::EmbeddingIndex> nearest_index;
    if (task == TaskKind::Retrieval) {
        if (config.distractor_protocols < 1)
            throw std::invalid_argument("run_suite: k must be >= 1");
        if (records.size() <= static_cast<std::size_t>(config.distractor_protocols))
            throw std::invalid_argument(
                "run_suite: the corpus must hold more than k other protocols");
        if (config.distractor_mode == DistractorMode::Nearest) {
            if (!deps.embedder)
                throw std::invalid_argument("run_suite: nearest distractors need an embedder");
            nearest_index = retrieval::build_index(records, deps.embedder);
        }
    }

    rng::Stream base(config.rng_seed);
    json per_run = json::array();
    std::vector<Flag> flags;
    std::map<std::string, std::vector<double>> run_means;

    auto evaluate_protocol = [&](const data::ProtocolRecord& record, rng::Stream stream, int run,
                                 json& entry, MetricPool& pool) {
        switch (task) {
            case TaskKind::NextStep: {
                std::vector<std::string> unparseable;
                auto score =
                    next_step_task(record, student, config, stream, deps.embedder, &unparseable);
                entry["function_accuracy"] = score.function_accuracy;
                set_optional(entry, "arg_name_precision", score.arg_name_precision);
                set_optional(entry, "arg_name_recall", score.arg_name_recall);
                set_optional(entry, "arg_value_bleu", score.arg_value_bleu);
                set_optional(entry, "arg_value_embedscore", score.arg_value_embedscore);
                entry["unparseable_steps"] = unparseable.size();
                pool.add("function_accuracy", score.function_accuracy);
                pool.add("arg_name_precision", score.arg_name_precision);
                pool.add("arg_name_recall", score.arg_name_recall);
                pool.add("arg_value_bleu", score.arg_value_bleu);
                pool.add("arg_value_embedscore", score.arg_value_embedscore);
                if (!unparseable.empty())
                    flags.push_back({run, record.id,
                                     std::to_string(unparseable.size()) +
                                         " unparseable next-step output(s)"});
                break;
            }
            case TaskKind::Generation: {
                auto score = generation_task(record, student, config, stream, deps.embedder);
                entry["function_precision"] = score.function_precision;
                entry["function_recall"] = score.function_recall;
                entry["levenshtein_normalized"] = score.levenshtein_normalized;
                set_optional(entry, "arg_name_precision", score.arg_name_precision);
                set_optional(entry, "arg_name_recall", score.arg_name_recall);
                set_optional(entry, "arg_value_bleu", score.arg_value_bleu);
                set_optional(entry, "arg_value_embedscore", score.arg_value_embedscore);
                entry["flagged"] = score.flagged;
                pool.add("function_precision", score.function_precision);
                pool.add("function_recall", score.function_recall);
                pool.add("levenshtein_normalized", score.levenshtein_normalized);
                pool.add("arg_name_precision", score.arg_name_precision);
                pool.add("arg_name_recall", score.arg_name_recall);
                pool.add("arg_value_bleu", score.arg_value_bleu);
                pool.add("arg_value_embedscore", score.arg_value_embedscore);
                if (score.flagged)
                    flags.push_back({run, record.id, "unparseable generation output"});
                break;
            }
            case TaskKind::Retrieval: {
                auto score = retrieval_task(record, records, student, config, stream,
                                            nearest_index ? &*nearest_index : nullptr);
                entry["precision"] = score.precision;
                entry["recall"] = score.recall;
                pool.add("precision", score.precision);
                pool.add("recall", score.recall);
                break;
            }
        }
    };

    for (int run = 0; run < config.runs; ++run) {
        rng::Stream run_stream = base.derive(static_cast<std::uint64_t>(run));
        student.on_run_start(run_stream.derive("student").next_u64());

        json protocols = json::array();
        MetricPool pool;

        for (const auto& record : records) {
            rng::Stream stream = run_stream.derive(record.id);
            json entry;
            entry["id"] = record.id;

            try {
                evaluate_protocol(record, stream, run, entry, pool);
            } catch (const llm::CassetteMiss&) {
                throw;  // a cassette/provider problem poisons the whole suite
            } catch (const llm::ProviderError&) {
                throw;
            } catch (const std::exception& e) {
                entry["error"] = e.what();
                flags.push_back({run, record.id, std::string("evaluation error: ") + e.what()});
            }
            protocols.push_back(std::move(entry));
        }

        json run_entry;
        run_entry["run"] = run;
        run_entry["protocols"] = std::move(protocols);
        run_entry["aggregate"] = pool.means();
        per_run.push_back(std::move(run_entry));

        for (const auto& [key, list] : pool.values)
            if (!list.empty()) run_means[key].push_back(metrics::aggregate(list).mean);
    }

    json aggregate;
    for (const auto& key : metric_keys(task)) {
        auto it = run_means.find(key);
        if (it == run_means.end() || it->second.empty()) {
            aggregate[key] = nullptr;
            continue;
        }
        auto stats = metrics::aggregate(it->second);
        aggregate[key] = {{"mean", stats.mean}, {"std", stats.std_dev}};
    }

    json flagged = json::array();
    for (const auto& flag : flags)
        flagged.push_back({{"run", flag.run}, {"id", flag.protocol_id}, {"reason", flag.reason}});

    RunReport report;
    report.document["task"] = std::string(to_string(task));
    report.document["student"] = student.name();
    report.document["config"] = config_json(task, config);
    report.document["protocol_count"] = records.size();
    report.document["cassette"] = nullptr;
    report.document["per_run"] = std::move(per_run);
    report.document["aggregate"] = std::move(aggregate);
    report.document["flagged"] = std::move(flagged);
    report.any_flagged = !flags.empty();
    return report;
}

void write_report(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report to " + path);
    out << report.document.dump(2) << '\n';
}

// --- rendering ----------------------------------------------------------------

namespace {

std::string format_value(const json& aggregate, const std::string& key, int decimals) {
    if (!aggregate.contains(key) || aggregate[key].is_null()) return "-";
    const json& cell = aggregate[key];
    double mean = cell.at("mean").get<double>();
    double std_dev = cell.at("std").get<double>();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f \xc2\xb1 %.*f", decimals, mean, decimals, std_dev);
    return buf;
}

}  // namespace

std::string render_report_markdown(const json& report) {
    if (!report.contains("task") || !report.contains("aggregate") || !report.contains("student"))
        throw std::runtime_error("malformed report: missing task/student/aggregate");
    std::string task = report["task"].get<std::string>();
    const json& aggregate = report["aggregate"];
    if (!aggregate.is_object() || aggregate.empty())
        throw std::runtime_error("malformed report: empty aggregate");
    const json& config = report.at("config");
    auto yn = [&](const char* key) {
        return config.contains(key) && config[key].get<bool>() ? "yes" : "no";
    };

    std::ostringstream out;
    std::string model = report["student"].get<std::string>();
    if (task == "next-step") {
        out << "| Model | Shuffle | Accuracy | Arg P | Arg R | EmbedScore | BLEU |\n";
        out << "|---|---|---|---|---|---|---|\n";
        out << "| " << model << " | " << yn("shuffle") << " | "
            << format_value(aggregate, "function_accuracy", 2) << " | "
            << format_value(aggregate, "arg_name_precision", 2) << " | "
            << format_value(aggregate, "arg_name_recall", 2) << " | "
            << format_value(aggregate, "arg_value_embedscore", 2) << " | "
            << format_value(aggregate, "arg_value_bleu", 3) << " |\n";
    } else if (task == "generate") {
        out << "| Model | Shuffle | Feedback | Function P | Function R | L_dn | Arg P | Arg R | "
               "EmbedScore | BLEU |\n";
        out << "|---|---|---|---|---|---|---|---|---|---|\n";
        out << "| " << model << " | " << yn("shuffle") << " | " << yn("feedback") << " | "
            << format_value(aggregate, "function_precision", 2) << " | "
            << format_value(aggregate, "function_recall", 2) << " | "
            << format_value(aggregate, "levenshtein_normalized", 3) << " | "
            << format_value(aggregate, "arg_name_precision", 2) << " | "
            << format_value(aggregate, "arg_name_recall", 2) << " | "
            << format_value(aggregate, "arg_value_embedscore", 2) << " | "
            << format_value(aggregate, "arg_value_bleu", 3) << " |\n";
    } else if (task == "retrieve") {
        out << "| Model | Distractors | Precision | Recall |\n";
        out << "|---|---|---|---|\n";
        out << "| " << model << " | " << config.value("distractors", "random") << " | "
            << format_value(aggregate, "precision", 2) << " | "
            << format_value(aggregate, "recall", 2) << " |\n";
    } else {
        throw std::runtime_error("malformed report: unknown task '" + task + "'");
    }
    return out.str();
}

}  // namespace protoeval::harness
