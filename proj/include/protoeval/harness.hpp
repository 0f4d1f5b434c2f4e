#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "protoeval/dataset.hpp"
#include "protoeval/dsl.hpp"
#include "protoeval/gateway.hpp"
#include "protoeval/metrics.hpp"
#include "protoeval/retrieval.hpp"
#include "protoeval/rng.hpp"

// Runs the evaluation tasks (next-step prediction, full generation, function
// retrieval, pairwise judging) for any student and aggregates over repeated
// runs.

namespace protoeval::harness {

enum class TaskKind { NextStep, Generation, Retrieval };

std::string_view to_string(TaskKind task);

enum class DescriptionSource { Original, Generated };
enum class DistractorMode { Random, Nearest };

struct TaskConfig {
    bool shuffle = false;
    bool feedback = false;
    DescriptionSource description_source = DescriptionSource::Original;
    DistractorMode distractor_mode = DistractorMode::Random;
    int distractor_protocols = 3;  // k
    int runs = 5;
    std::uint64_t rng_seed = 0;
    int feedback_max_rounds = 3;
};

struct NextStepContext {
    const data::ProtocolRecord* record = nullptr;
    std::size_t step_index = 0;  // 0-based
    std::string title;
    std::string description;
    std::string library_text;  // shuffled when the config says so
    std::string prefix_text;   // gold calls before this step
};

struct GenerationContext {
    const data::ProtocolRecord* record = nullptr;
    std::string title;
    std::string description;
    std::string library_text;
    std::string previous_attempt;  // empty on the first round
    std::string errors;
    int round = 1;
};

struct RetrievalContext {
    const data::ProtocolRecord* record = nullptr;
    std::string title;
    std::string description;
    std::string candidates_text;
    std::vector<std::string> candidate_names;
};

class Student {
public:
    virtual ~Student() = default;
    virtual std::string name() const = 0;
    virtual void on_run_start(std::uint64_t /*run_seed*/) {}
    virtual std::string next_call(const NextStepContext& context) = 0;
    virtual std::string full_program(const GenerationContext& context) = 0;
    virtual std::vector<std::string> select_functions(const RetrievalContext& context) = 0;
};

// Replays the gold pseudocode; perfect by construction.
class OracleStudent : public Student {
public:
    std::string name() const override { return "oracle"; }
    std::string next_call(const NextStepContext& context) override;
    std::string full_program(const GenerationContext& context) override;
    std::vector<std::string> select_functions(const RetrievalContext& context) override;
};

// Uniform-random choices over the offered functions.
class RandomStudent : public Student {
public:
    std::string name() const override { return "random"; }
    void on_run_start(std::uint64_t run_seed) override;
    std::string next_call(const NextStepContext& context) override;
    std::string full_program(const GenerationContext& context) override;
    std::vector<std::string> select_functions(const RetrievalContext& context) override;

private:
    rng::Stream stream_{0};
};

// Prompts a chat model through the gateway.
class LiveStudent : public Student {
public:
    LiveStudent(llm::Gateway& gateway, std::string model_id);
    std::string name() const override { return "live:" + model_id_; }
    std::string next_call(const NextStepContext& context) override;
    std::string full_program(const GenerationContext& context) override;
    std::vector<std::string> select_functions(const RetrievalContext& context) override;

private:
    std::string ask(const std::string& prompt);
    llm::Gateway& gateway_;
    std::string model_id_;
};

// "oracle" | "random" | "live:<model>"; live students need the gateway.
std::unique_ptr<Student> make_student(const std::string& spec, llm::Gateway* gateway);

struct Flag {
    int run = 0;
    std::string protocol_id;
    std::string reason;
};

struct SuiteDeps {
    metrics::Embedder embedder;  // optional; enables embed-score and nearest distractors
};

// Per-protocol task entry points (single run). The rng stream must already
// be derived for (run, protocol).
metrics::NextStepScore next_step_task(const data::ProtocolRecord& record, Student& student,
                                      const TaskConfig& config, rng::Stream stream,
                                      const metrics::Embedder& embedder,
                                      std::vector<std::string>* unparseable = nullptr);

metrics::GenerationScore generation_task(const data::ProtocolRecord& record, Student& student,
                                         const TaskConfig& config, rng::Stream stream,
                                         const metrics::Embedder& embedder);

metrics::RetrievalScore retrieval_task(const data::ProtocolRecord& record,
                                       const std::vector<data::ProtocolRecord>& corpus,
                                       Student& student, const TaskConfig& config,
                                       rng::Stream stream,
                                       const retrieval::EmbeddingIndex* nearest_index);

enum class JudgePreference { Gold, Predicted, Abstain };

struct JudgeOutcome {
    JudgePreference preference = JudgePreference::Abstain;
    bool gold_first = false;
};

using ChatFn = std::function<std::string(const llm::ChatRequest&)>;

// Presents gold and predicted programs in randomized order and records which
// one the judge prefers. Position is logged so order bias stays measurable.
JudgeOutcome pairwise_judge_task(const data::ProtocolRecord& record,
                                 const dsl::PseudoProgram& predicted, const ChatFn& judge,
                                 const std::string& model_id, rng::Stream stream);

struct RunReport {
    nlohmann::json document;
    bool any_flagged = false;
};

// cfg.runs independent repetitions with per-run rng streams derived from
// rng_seed and the run index; aggregates are mean and sample std over runs.
RunReport run_suite(const std::vector<data::ProtocolRecord>& records, TaskKind task,
                    Student& student, const TaskConfig& config, const SuiteDeps& deps);

void write_report(const RunReport& report, const std::string& path);

// Markdown table mirroring the published layout for the report's task.
std::string render_report_markdown(const nlohmann::json& report);

}  // namespace protoeval::harness
