// Acceptance suite: every checked behavior is pinned here with its oracle.
// One pass/fail line per criterion; exit code 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "generators.hpp"
#include "protoeval/dataset.hpp"
#include "protoeval/dsl.hpp"
#include "protoeval/gateway.hpp"
#include "protoeval/harness.hpp"
#include "protoeval/metrics.hpp"
#include "protoeval/retrieval.hpp"
#include "protoeval/rng.hpp"
#include "protoeval/teacher.hpp"
#include "temp.hpp"

using namespace protoeval;

namespace {

struct Criterion {
    int number;
    std::string title;
    std::function<void(std::ostream&)> body;  // throws on failure
};

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure(message);
}

template <typename T>
void require_eq(const T& actual, const T& expected, const std::string& what) {
    if (!(actual == expected)) {
        std::ostringstream out;
        out << what << ": expected " << expected << ", got " << actual;
        throw CheckFailure(out.str());
    }
}

void require_close(double actual, double expected, double tolerance, const std::string& what) {
    if (std::abs(actual - expected) > tolerance) {
        std::ostringstream out;
        out << what << ": |" << actual << " - " << expected << "| > " << tolerance;
        throw CheckFailure(out.str());
    }
}

metrics::Embedder hashed() {
    return [](const std::string& text) { return llm::hashed_embedding(text); };
}

// exhaustive unmemoized recursion, the independent oracle for criterion 1
std::size_t recursive_distance(const std::vector<std::string>& a,
                               const std::vector<std::string>& b, std::size_t i, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    std::size_t best = recursive_distance(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, recursive_distance(a, b, i + 1, j) + 1);
    best = std::min(best, recursive_distance(a, b, i, j + 1) + 1);
    return best;
}

std::vector<std::vector<std::string>> all_sequences_up_to(std::size_t max_len,
                                                          std::size_t alphabet) {
    std::vector<std::vector<std::string>> out = {{}};
    std::vector<std::vector<std::string>> frontier = {{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::vector<std::string>> next;
        for (const auto& seq : frontier) {
            for (std::size_t c = 0; c < alphabet; ++c) {
                auto extended = seq;
                extended.push_back(std::string(1, static_cast<char>('A' + c)));
                next.push_back(extended);
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

void criterion_levenshtein_oracle(std::ostream& log) {
    auto start = std::chrono::steady_clock::now();
    auto sequences = all_sequences_up_to(5, 3);
    require(sequences.size() == 364, "expected 364 sequences over a 3-symbol alphabet");
    std::size_t pairs = 0;
    for (const auto& a : sequences) {
        for (const auto& b : sequences) {
            std::size_t dp = metrics::levenshtein(a, b).distance;
            std::size_t oracle = recursive_distance(a, b, 0, 0);
            if (dp != oracle) {
                std::ostringstream out;
                out << "distance mismatch at pair " << pairs << " (dp " << dp << ", oracle "
                    << oracle << ")";
                throw CheckFailure(out.str());
            }
            ++pairs;
        }
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    require(pairs == 364u * 364u, "pair count mismatch");
    require(elapsed < 10000, "exceeded the 10 s budget (" + std::to_string(elapsed) + " ms)");
    log << pairs << " pairs in " << elapsed << " ms";
}

void criterion_metric_properties(std::ostream& log) {
    rng::Stream stream(0xB10B5EED);
    int cases = 0;
    for (int i = 0; i < 1200; ++i) {
        auto pred = testgen::random_name_sequence(stream, 6, 3);
        auto gold = testgen::random_name_sequence(stream, 6, 3);

        auto pr = metrics::multiset_function_pr(pred, gold);
        require(pr.precision >= 0.0 && pr.precision <= 1.0, "precision out of bounds");
        require(pr.recall >= 0.0 && pr.recall <= 1.0, "recall out of bounds");

        auto shuffled_pred = pred;
        auto shuffled_gold = gold;
        stream.shuffle(shuffled_pred);
        stream.shuffle(shuffled_gold);
        auto pr_shuffled = metrics::multiset_function_pr(shuffled_pred, shuffled_gold);
        require(pr.precision == pr_shuffled.precision && pr.recall == pr_shuffled.recall,
                "multiset P/R not permutation invariant");

        auto sorted_pred = pred;
        auto sorted_gold = gold;
        std::sort(sorted_pred.begin(), sorted_pred.end());
        std::sort(sorted_gold.begin(), sorted_gold.end());
        bool equal_multisets = sorted_pred == sorted_gold;
        require((pr.precision == 1.0 && pr.recall == 1.0) == equal_multisets,
                "P=R=1 must hold exactly for equal multisets");

        auto edit = metrics::levenshtein(pred, gold);
        std::size_t non_match = 0;
        for (const auto& step : edit.alignment)
            if (step.op != metrics::EditOp::Match) ++non_match;
        require(non_match == edit.distance, "alignment cost differs from distance");
        require(metrics::replay_alignment(pred, gold, edit.alignment) == gold,
                "alignment replay did not reconstruct gold");
        ++cases;
    }
    log << cases << " randomized cases, zero violations";
}

void criterion_parser_round_trip(std::ostream& log) {
    rng::Stream stream(0x5EED5A17);
    for (int i = 0; i < 1000; ++i) {
        auto program = testgen::random_program(stream);
        std::string text = dsl::render_program(program);
        auto reparsed = dsl::parse_program(text);
        require(reparsed.ok(), "rendered program failed to parse:\n" + text);
        require(dsl::same_ast(program, *reparsed.program),
                "round-trip AST mismatch for:\n" + text);
    }
    log << "1000 programs, zero failures";
}

void criterion_validator_codes(std::ostream& log) {
    auto policy = dsl::ValidationPolicy::defaults();
    auto lib = dsl::parse_signatures("def Mix(volume):\ndef Incubate(time, temperature):");
    require(lib.ok(), "fixture library failed to parse");

    // E_SYNTAX
    auto syntax = dsl::parse_program("Mix(");
    require(!syntax.ok() && syntax.diagnostics.size() == 1 &&
                syntax.diagnostics[0].code == dsl::DiagnosticCode::Syntax,
            "seeded E_SYNTAX fixture did not trigger exactly E_SYNTAX");

    auto check_single = [&](const std::string& code_text, dsl::DiagnosticCode expected,
                            const dsl::FunctionLibrary& library) {
        auto program = dsl::parse_program(code_text);
        require(program.ok(), "fixture program failed to parse: " + code_text);
        auto diags = dsl::validate(*program.program, library, policy);
        require(diags.size() == 1, "expected exactly one diagnostic for: " + code_text);
        require(diags[0].code == expected,
                std::string("expected ") + std::string(dsl::to_string(expected)) + ", got " +
                    std::string(dsl::to_string(diags[0].code)));
    };

    check_single("Foo(volume=\"10 mL\")", dsl::DiagnosticCode::UndefinedFunction, *lib.library);
    check_single("Mix()", dsl::DiagnosticCode::NoArgs, *lib.library);
    check_single("Incubate(time=30, temperature=\"37 C\")", dsl::DiagnosticCode::MissingUnits,
                 *lib.library);
    check_single("Mix(volume=\"10 mL\")", dsl::DiagnosticCode::NoFunctions,
                 dsl::FunctionLibrary{});

    // the clean bundled corpus yields zero diagnostics
    auto loaded = data::load_dataset(testutil::sample_dataset());
    require(loaded.warnings.empty(), "sample corpus produced load warnings");
    require(loaded.records.size() == 5, "sample corpus must hold 5 protocols");
    for (const auto& record : loaded.records) {
        auto diags = dsl::validate(record.gold_program, record.library, policy);
        require(diags.empty(), "sample protocol " + record.id + " has diagnostics");
    }
    log << "all five codes triggered exactly; sample corpus clean";
}

void criterion_oracle_end_to_end(std::ostream& log) {
    auto records = data::load_dataset(testutil::sample_dataset()).records;
    harness::OracleStudent oracle;
    harness::SuiteDeps deps;
    deps.embedder = hashed();

    harness::TaskConfig config;
    config.runs = 1;
    config.rng_seed = 7;

    auto next = harness::run_suite(records, harness::TaskKind::NextStep, oracle, config, deps);
    require_eq(next.document["aggregate"]["function_accuracy"]["mean"].get<double>(), 1.0,
               "next-step accuracy");
    require_eq(next.document["aggregate"]["arg_value_bleu"]["mean"].get<double>(), 1.0,
               "next-step BLEU");

    auto generation =
        harness::run_suite(records, harness::TaskKind::Generation, oracle, config, deps);
    require_eq(generation.document["aggregate"]["function_precision"]["mean"].get<double>(), 1.0,
               "generation precision");
    require_eq(generation.document["aggregate"]["function_recall"]["mean"].get<double>(), 1.0,
               "generation recall");
    require_eq(generation.document["aggregate"]["levenshtein_normalized"]["mean"].get<double>(),
               0.0, "generation L_dn");
    require_eq(generation.document["aggregate"]["arg_value_bleu"]["mean"].get<double>(), 1.0,
               "generation BLEU");
    require(!next.any_flagged && !generation.any_flagged, "oracle runs must not be flagged");
    log << "accuracy=1.0 P=R=1.0 L_dn=0.0 BLEU=1.0 on the bundled sample";
}

void criterion_random_student_calibration(std::ostream& log) {
    // synthetic protocol: K functions, 25 gold steps, 20 runs -> 500 samples
    const std::size_t k = 5;
    std::ostringstream signatures;
    std::ostringstream code;
    for (std::size_t i = 0; i < k; ++i)
        signatures << "def Step" << i << "(arg):\n";
    rng::Stream gold_picks(1234);
    for (int i = 0; i < 25; ++i)
        code << "Step" << gold_picks.below(k) << "(arg=\"1 uL\")\n";

    data::ProtocolRecord record;
    record.id = "calibration";
    record.title = "Calibration";
    record.description = "Synthetic calibration protocol.";
    record.steps = {"a", "b", "c"};
    auto lib = dsl::parse_signatures(signatures.str());
    auto program = dsl::parse_program(code.str());
    require(lib.ok() && program.ok(), "calibration fixture must parse");
    record.library = *lib.library;
    record.gold_program = *program.program;

    harness::RandomStudent student;
    harness::TaskConfig config;
    config.runs = 20;
    config.rng_seed = 421;
    harness::SuiteDeps deps;
    deps.embedder = hashed();

    auto report = harness::run_suite({record}, harness::TaskKind::NextStep, student, config, deps);

    double total_correct = 0.0;
    std::size_t total_steps = 0;
    for (const auto& run : report.document["per_run"]) {
        double accuracy = run["protocols"][0]["function_accuracy"].get<double>();
        total_correct += accuracy * 25.0;
        total_steps += 25;
    }
    require(total_steps >= 500, "need at least 500 sampled steps");
    double p = 1.0 / static_cast<double>(k);
    double observed = total_correct / static_cast<double>(total_steps);
    double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(total_steps));
    require_close(observed, p, 3.0 * sigma, "random-student accuracy");
    std::ostringstream msg;
    msg << "observed " << observed << " vs 1/K=" << p << " over " << total_steps
        << " steps (3 sigma = " << 3.0 * sigma << ")";
    log << msg.str();
}

void criterion_replay_determinism(std::ostream& log) {
    testutil::TempDir dir;
    auto records = data::load_dataset(testutil::sample_dataset()).records;
    records.resize(2);
    std::string cassette = (dir.path() / "suite.jsonl").string();

    harness::TaskConfig config;
    config.runs = 1;
    config.rng_seed = 5;

    {
        auto provider = std::make_shared<llm::ScriptedProvider>();
        for (int i = 0; i < 40; ++i) provider->push_chat("Mix(volume=\"1 uL\")");
        llm::GatewayConfig gateway_config;
        gateway_config.mode = llm::GatewayMode::Record;
        gateway_config.cassette_path = cassette;
        llm::Gateway gateway(gateway_config, provider);
        harness::LiveStudent student(gateway, "stub-model");
        harness::SuiteDeps deps;
        deps.embedder = hashed();
        harness::run_suite(records, harness::TaskKind::NextStep, student, config, deps);
    }

    auto replay_once = [&](const std::string& out_path) {
        llm::GatewayConfig gateway_config;
        gateway_config.mode = llm::GatewayMode::Replay;
        gateway_config.cassette_path = cassette;
        llm::Gateway gateway(gateway_config, nullptr);
        harness::LiveStudent student(gateway, "stub-model");
        harness::SuiteDeps deps;
        deps.embedder = hashed();
        auto report =
            harness::run_suite(records, harness::TaskKind::NextStep, student, config, deps);
        report.document["cassette"] = cassette;
        harness::write_report(report, out_path);
    };

    std::string first = (dir.path() / "first.json").string();
    std::string second = (dir.path() / "second.json").string();
    replay_once(first);
    replay_once(second);

    auto read_all = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    std::string bytes_a = read_all(first);
    std::string bytes_b = read_all(second);
    require(!bytes_a.empty(), "replay report is empty");
    require(bytes_a == bytes_b, "replay reports differ byte for byte");
    log << "two replays, byte-identical reports (" << bytes_a.size() << " bytes)";
}

void criterion_sample_stats(std::ostream& log) {
    auto fixture =
        data::load_dataset(testutil::source_dir() + "/tests/fixtures/stats_pair.json");
    require(fixture.records.size() == 2, "stats fixture must hold 2 records");
    auto stats = data::compute_stats(fixture.records);
    require_eq(stats.avg_steps, 4.0, "avg_steps");
    require_eq(stats.avg_protocol_tokens, 18.5, "avg_protocol_tokens");
    require_eq(stats.avg_tokens_per_step, 37.0 / 8.0, "avg_tokens_per_step");
    require_eq(stats.avg_tokens_original_description, 5.5, "avg_tokens_original_description");
    require_eq(stats.avg_tokens_generated_description, 5.0, "avg_tokens_generated_description");
    require_eq(stats.avg_pseudofunctions_per_protocol, 2.0, "avg_pseudofunctions_per_protocol");
    require_eq(stats.avg_pseudofunctions_per_step, 0.5, "avg_pseudofunctions_per_step");
    require_eq(stats.avg_pseudocode_lines, 2.5, "avg_pseudocode_lines");

    auto sample = data::compute_stats(data::load_dataset(testutil::sample_dataset()).records);
    require_eq(sample.protocol_count, std::size_t{5}, "sample protocol_count");
    log << "fixture and sample statistics match exactly";
}

void criterion_teacher_feedback(std::ostream& log) {
    const char* invalid = R"(```
def Incubate(sample, temperature, duration):
    "Incubate the sample"
```

```
Incubate(sample="culture", temperature=37, duration="30 min")
```
)";
    const char* valid = R"(```
def Incubate(sample, temperature, duration):
    "Incubate the sample"
```

```
Incubate(sample="culture", temperature="37 C", duration="30 min")
```
)";

    auto scripted = [](std::vector<std::string> replies) {
        auto shared = std::make_shared<std::vector<std::string>>(std::move(replies));
        auto index = std::make_shared<std::size_t>(0);
        return teacher::ChatFn([shared, index](const llm::ChatRequest&) {
            if (*index >= shared->size()) throw std::runtime_error("script exhausted");
            return (*shared)[(*index)++];
        });
    };

    teacher::TranslationPolicy policy;
    policy.include_self_check = false;
    policy.max_feedback_rounds = 3;

    auto converged = teacher::translate_protocol("T", "D", {"incubate the culture"},
                                                 scripted({invalid, valid}), policy);
    require_eq(converged.rounds_used, 2, "rounds_used for invalid-then-valid");
    require(converged.diagnostics_history.size() == 2, "history length must equal rounds_used");
    require(converged.diagnostics_history[0].size() == 1 &&
                converged.diagnostics_history[0][0].code == dsl::DiagnosticCode::MissingUnits,
            "first round must record the unit diagnostic");
    require(converged.diagnostics_history[1].empty(), "second round must be clean");

    bool failed = false;
    try {
        teacher::translate_protocol("T", "D", {"incubate the culture"},
                                    scripted({invalid, invalid, invalid}), policy);
    } catch (const teacher::TranslationFailed& e) {
        failed = true;
        require(e.diagnostics_history.size() == 3,
                "always-invalid translation must fail after exactly max_rounds");
        for (const auto& round : e.diagnostics_history)
            require(!round.empty(), "every failed round records diagnostics");
    }
    require(failed, "always-invalid cassette must raise TranslationFailed");
    log << "converged in 2 rounds; always-invalid failed after exactly 3";
}

void criterion_judge_balance(std::ostream& log) {
    auto records = data::load_dataset(testutil::sample_dataset()).records;
    const auto& record = records[0];
    auto predicted = dsl::parse_program("Freeze(sample=\"stock\", temperature=\"-80 C\")");
    require(predicted.ok(), "predicted fixture must parse");

    // position-biased judge: always answers A
    harness::ChatFn biased = [](const llm::ChatRequest&) { return std::string("A"); };

    rng::Stream stream(2024);
    int trials = 200;
    int gold_preferred = 0;
    int gold_first = 0;
    for (int i = 0; i < trials; ++i) {
        auto outcome = harness::pairwise_judge_task(record, *predicted.program, biased,
                                                    "judge-model", stream.derive(i));
        require(outcome.preference != harness::JudgePreference::Abstain,
                "biased judge always answers");
        if (outcome.preference == harness::JudgePreference::Gold) ++gold_preferred;
        if (outcome.gold_first) ++gold_first;
    }
    double gold_rate = static_cast<double>(gold_preferred) / trials;
    require_close(gold_rate, 0.5, 0.10, "gold preference rate under an always-A judge");
    double predicted_rate = 1.0 - gold_rate;
    require_close(predicted_rate, 0.5, 0.10, "predicted preference rate");
    std::ostringstream msg;
    msg << "gold preferred " << gold_preferred << "/" << trials << " (gold shown first "
        << gold_first << " times)";
    log << msg.str();
}

void criterion_live_smoke(std::ostream& log) {
    const char* key = std::getenv("PROTOEVAL_API_KEY");
    const char* base = std::getenv("PROTOEVAL_API_BASE");
    if (!key || !*key || !base || !*base) {
        log << "SKIP (no credentials in PROTOEVAL_API_KEY / PROTOEVAL_API_BASE)";
        return;
    }
    const char* model_env = std::getenv("PROTOEVAL_MODEL");
    std::string model = model_env && *model_env ? model_env : "gpt-4";

    llm::GatewayConfig gateway_config;
    gateway_config.mode = llm::GatewayMode::Passthrough;
    llm::Gateway gateway(gateway_config, std::make_shared<llm::HttpProvider>());

    auto records = data::load_dataset(testutil::sample_dataset()).records;
    records.resize(1);

    teacher::TranslationPolicy policy;
    policy.model_id = model;
    auto translated = teacher::translate_protocol(
        records[0].title, records[0].description, records[0].steps,
        [&](const llm::ChatRequest& request) { return gateway.chat(request); }, policy);
    require(!translated.library.empty() && !translated.program.empty(),
            "live translation must produce a library and program");

    harness::LiveStudent student(gateway, model);
    harness::TaskConfig config;
    config.runs = 1;
    config.rng_seed = 1;
    harness::SuiteDeps deps;
    deps.embedder = hashed();
    auto report = harness::run_suite(records, harness::TaskKind::Generation, student, config, deps);
    const auto& aggregate = report.document["aggregate"];
    for (const char* metric_key : {"function_precision", "function_recall"}) {
        if (aggregate[metric_key].is_null()) continue;
        double value = aggregate[metric_key]["mean"].get<double>();
        require(value >= 0.0 && value <= 1.0, "live metric out of bounds");
    }

    // directional expectation, logged but never asserted
    harness::TaskConfig shuffled = config;
    shuffled.shuffle = true;
    auto next_plain =
        harness::run_suite(records, harness::TaskKind::NextStep, student, config, deps);
    auto next_shuffled =
        harness::run_suite(records, harness::TaskKind::NextStep, student, shuffled, deps);
    double plain = next_plain.document["aggregate"]["function_accuracy"]["mean"].get<double>();
    double shuf = next_shuffled.document["aggregate"]["function_accuracy"]["mean"].get<double>();
    log << "live OK; next-step accuracy plain=" << plain << " shuffled=" << shuf
        << (shuf <= plain ? " (drop observed)" : " (no drop this run)");
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "Levenshtein DP equals the exhaustive recursive oracle", criterion_levenshtein_oracle},
        {2, "Metric property suite (>=1000 randomized cases)", criterion_metric_properties},
        {3, "Parser round-trip on 1000 random programs", criterion_parser_round_trip},
        {4, "Validator triggers each diagnostic code exactly; sample corpus clean",
         criterion_validator_codes},
        {5, "Oracle student end-to-end on the bundled sample", criterion_oracle_end_to_end},
        {6, "Uniform-random student accuracy within 3 sigma of 1/K",
         criterion_random_student_calibration},
        {7, "Replay determinism: byte-identical reports", criterion_replay_determinism},
        {8, "Sample dataset statistics equal hand-counted values", criterion_sample_stats},
        {9, "Teacher feedback loop round counts and diagnostics", criterion_teacher_feedback},
        {10, "Judge order randomization balances a position-biased judge",
         criterion_judge_balance},
        {11, "Live-mode smoke (optional, needs credentials)", criterion_live_smoke},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        std::ostringstream detail;
        bool passed = true;
        std::string error;
        try {
            criterion.body(detail);
        } catch (const std::exception& e) {
            passed = false;
            error = e.what();
        }
        if (passed) {
            std::cout << "[PASS] criterion " << criterion.number << ": " << criterion.title;
            if (!detail.str().empty()) std::cout << " -- " << detail.str();
            std::cout << '\n';
        } else {
            ++failures;
            std::cout << "[FAIL] criterion " << criterion.number << ": " << criterion.title
                      << " -- " << error << '\n';
        }
    }
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
