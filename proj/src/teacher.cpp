#include "protoeval/teacher.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "protoeval/prompts.hpp"

namespace protoeval::teacher {

namespace {

std::string numbered_steps(const std::vector<std::string>& steps) {
    std::ostringstream out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out << '\n';
        out << (i + 1) << ". " << steps[i];
    }
    return out.str();
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Parses one attempt into library + program; diagnostics from block
// extraction, signature parsing, program parsing, and validation are pooled.
struct ParsedAttempt {
    std::optional<dsl::FunctionLibrary> library;
    std::optional<dsl::PseudoProgram> program;
    std::vector<dsl::Diagnostic> diagnostics;
    bool clean() const { return library && program && diagnostics.empty(); }
};

ParsedAttempt parse_attempt(const std::string& reply, const dsl::ValidationPolicy& policy) {
    ParsedAttempt attempt;
    auto blocks = extract_two_blocks(reply);
    if (!blocks) {
        attempt.diagnostics.push_back(
            {dsl::DiagnosticCode::Syntax, 1,
             "expected two fenced code blocks: pseudofunctions, then pseudocode"});
        return attempt;
    }
    auto lib = dsl::parse_signatures(blocks->first);
    if (!lib.ok()) {
        attempt.diagnostics.insert(attempt.diagnostics.end(), lib.diagnostics.begin(),
                                   lib.diagnostics.end());
    } else {
        attempt.library = std::move(*lib.library);
    }
    auto prog = dsl::parse_program(blocks->second);
    if (!prog.ok()) {
        attempt.diagnostics.insert(attempt.diagnostics.end(), prog.diagnostics.begin(),
                                   prog.diagnostics.end());
    } else {
        attempt.program = std::move(*prog.program);
    }
    if (attempt.library && attempt.program) {
        auto diags = dsl::validate(*attempt.program, *attempt.library, policy);
        attempt.diagnostics.insert(attempt.diagnostics.end(), diags.begin(), diags.end());
    }
    return attempt;
}

}  // namespace

const std::string& feedback_message(dsl::DiagnosticCode code) {
    static const std::map<dsl::DiagnosticCode, std::string> table = {
        {dsl::DiagnosticCode::Syntax,
         "The output is not valid pseudocode: every line must be a single call of the form "
         "result = Function(name=value, ...) with quoted values."},
        {dsl::DiagnosticCode::UndefinedFunction,
         "The pseudocode calls a function that is not defined in the pseudofunction block."},
        {dsl::DiagnosticCode::NoFunctions,
         "No pseudofunctions are defined; define every function before using it."},
        {dsl::DiagnosticCode::NoArgs,
         "A pseudocode call has no arguments; every call must name its arguments."},
        {dsl::DiagnosticCode::MissingUnits,
         "A numerical parameter has no units; put the number and its unit together in quotes."},
    };
    return table.at(code);
}

std::string format_feedback(const std::vector<dsl::Diagnostic>& diagnostics) {
    std::ostringstream out;
    std::vector<dsl::DiagnosticCode> seen;
    for (const auto& diag : diagnostics) {
        bool first_of_code =
            std::find(seen.begin(), seen.end(), diag.code) == seen.end();
        if (first_of_code) {
            seen.push_back(diag.code);
            if (seen.size() > 1) out << '\n';
            out << "- " << feedback_message(diag.code) << '\n';
        }
        out << "  line " << diag.line << ": " << diag.message << '\n';
    }
    return out.str();
}

std::optional<std::pair<std::string, std::string>> extract_two_blocks(const std::string& reply) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while (blocks.size() < 2) {
        std::size_t open = reply.find("```", pos);
        if (open == std::string::npos) break;
        std::size_t content_start = reply.find('\n', open);
        if (content_start == std::string::npos) break;  // fence with no body
        ++content_start;
        std::size_t close = reply.find("```", content_start);
        if (close == std::string::npos) break;
        blocks.push_back(reply.substr(content_start, close - content_start));
        pos = close + 3;
    }
    if (blocks.size() < 2) return std::nullopt;
    return std::make_pair(blocks[0], blocks[1]);
}

TranslationResult translate_protocol(const std::string& title, const std::string& description,
                                     const std::vector<std::string>& steps, const ChatFn& chat,
                                     const TranslationPolicy& policy) {
    if (steps.empty()) throw std::invalid_argument("translate_protocol: no steps");
    if (policy.max_feedback_rounds < 1)
        throw std::invalid_argument("translate_protocol: max_feedback_rounds must be >= 1");

    std::string user = prompts::fill(prompts::get("translate"),
                                     {{"title", title},
                                      {"description", description},
                                      {"steps", numbered_steps(steps)}});

    llm::ChatRequest request;
    request.model_id = policy.model_id;
    request.temperature = policy.temperature;
    request.seed = policy.seed;
    request.messages.push_back({"system", prompts::get("translate_system")});
    request.messages.push_back({"user", user});

    TranslationResult result;
    for (int round = 1; round <= policy.max_feedback_rounds; ++round) {
        std::string reply = chat(request);
        ParsedAttempt attempt = parse_attempt(reply, policy.validation);
        result.rounds_used = round;
        result.diagnostics_history.push_back(attempt.diagnostics);

        if (!attempt.clean()) {
            if (round == policy.max_feedback_rounds) break;
            request.messages.push_back({"assistant", reply});
            request.messages.push_back(
                {"user", prompts::fill(prompts::get("feedback"),
                                       {{"errors", format_feedback(attempt.diagnostics)}})});
            continue;
        }

        result.library = std::move(*attempt.library);
        result.program = std::move(*attempt.program);

        if (policy.include_self_check) {
            llm::ChatRequest check = request;
            check.messages.push_back({"assistant", reply});
            check.messages.push_back({"user", prompts::get("self_check")});
            std::string revised = chat(check);
            ParsedAttempt revised_attempt = parse_attempt(revised, policy.validation);
            // a broken self-check reverts to the validated result
            if (revised_attempt.clean()) {
                result.library = std::move(*revised_attempt.library);
                result.program = std::move(*revised_attempt.program);
                result.self_check_applied = true;
            }
        }
        return result;
    }

    throw TranslationFailed("translation failed after " +
                                std::to_string(policy.max_feedback_rounds) + " rounds",
                            result.diagnostics_history);
}

std::string generate_description(const std::vector<std::string>& steps, const ChatFn& chat,
                                 const std::string& model_id) {
    if (steps.empty()) throw std::invalid_argument("generate_description: no steps");
    llm::ChatRequest request;
    request.model_id = model_id;
    request.temperature = 0.0;
    request.messages.push_back(
        {"user", prompts::fill(prompts::get("describe"), {{"steps", numbered_steps(steps)}})});
    std::string reply = trim(chat(request));
    if (reply.empty())
        throw std::runtime_error("generate_description: model returned empty text");
    return reply;
}

}  // namespace protoeval::teacher
