#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "protoeval/dsl.hpp"
#include "protoeval/gateway.hpp"

// Teacher pipeline: translates a natural-language protocol into a
// (pseudofunction library, pseudocode) pair through a chat model with an
// automatic feedback loop, and generates short machine descriptions.

namespace protoeval::teacher {

using ChatFn = std::function<std::string(const llm::ChatRequest&)>;

struct TranslationPolicy {
    int max_feedback_rounds = 3;
    dsl::ValidationPolicy validation = dsl::ValidationPolicy::defaults();
    bool include_self_check = true;
    std::string model_id = "gpt-4";
    double temperature = 0.0;
    std::optional<int> seed;
};

struct TranslationResult {
    dsl::FunctionLibrary library;
    dsl::PseudoProgram program;
    int rounds_used = 0;
    std::vector<std::vector<dsl::Diagnostic>> diagnostics_history;  // one list per round
    bool self_check_applied = false;
};

struct TranslationFailed : std::runtime_error {
    std::vector<std::vector<dsl::Diagnostic>> diagnostics_history;
    TranslationFailed(const std::string& what,
                      std::vector<std::vector<dsl::Diagnostic>> history)
        : std::runtime_error(what), diagnostics_history(std::move(history)) {}
};

// Fixed feedback message for a diagnostic code; the table is part of the
// harness contract and never varies between runs.
const std::string& feedback_message(dsl::DiagnosticCode code);

// Builds the feedback paragraph for a round: one fixed message per distinct
// code, in order of first appearance, each followed by the concrete
// diagnostics.
std::string format_feedback(const std::vector<dsl::Diagnostic>& diagnostics);

// Splits a model reply into (pseudofunctions text, pseudocode text); both
// must arrive as fenced code blocks.
std::optional<std::pair<std::string, std::string>> extract_two_blocks(const std::string& reply);

TranslationResult translate_protocol(const std::string& title, const std::string& description,
                                     const std::vector<std::string>& steps, const ChatFn& chat,
                                     const TranslationPolicy& policy = {});

// One-shot description generation from the protocol steps; the returned
// text never replaces the original description.
std::string generate_description(const std::vector<std::string>& steps, const ChatFn& chat,
                                 const std::string& model_id = "gpt-4");

}  // namespace protoeval::teacher
