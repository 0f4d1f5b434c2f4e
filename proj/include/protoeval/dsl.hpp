#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Restricted pseudocode DSL: flat sequences of keyword-argument calls plus a
// textual signature format for the admissible function set. No control flow,
// no positional arguments, no expressions.

namespace protoeval::dsl {

enum class ValueKind {
    Quantity,    // quoted text mixing numeric and non-numeric tokens, "10 mL"
    BareNumber,  // unquoted numeric literal
    Text,        // any other quoted text
    Ident,       // reference to an earlier result name
    List,        // bracketed, non-empty
};

struct ValueLiteral {
    ValueKind kind = ValueKind::Text;
    std::string text;                 // Quantity/Text content, Ident name
    double number = 0.0;              // BareNumber only
    std::vector<ValueLiteral> items;  // List only

    static ValueLiteral quantity(std::string s);
    static ValueLiteral bare_number(double v);
    static ValueLiteral text_value(std::string s);
    static ValueLiteral ident(std::string name);
    static ValueLiteral list(std::vector<ValueLiteral> items);

    // Classifies quoted content as Quantity or Text.
    static ValueLiteral from_quoted(std::string s);

    bool operator==(const ValueLiteral& other) const;

    // Plain-text form used when comparing argument values across programs
    // (quotes stripped, numbers canonical).
    std::string value_text() const;
};

struct ArgumentBinding {
    std::string name;
    ValueLiteral value;
    bool operator==(const ArgumentBinding&) const = default;
};

struct PseudoCall {
    std::string callee;
    std::vector<ArgumentBinding> args;
    std::optional<std::string> result_name;
    std::optional<std::string> comment;
    int line = 1;

    const ArgumentBinding* find_arg_ci(std::string_view name) const;
};

struct PseudoProgram {
    std::vector<PseudoCall> calls;

    bool empty() const { return calls.empty(); }
    std::size_t size() const { return calls.size(); }
    std::vector<std::string> callee_names() const;
};

// AST equality modulo source line numbers.
bool same_ast(const PseudoCall& a, const PseudoCall& b);
bool same_ast(const PseudoProgram& a, const PseudoProgram& b);

struct ParamSpec {
    std::string name;
    std::optional<std::string> description;
    bool operator==(const ParamSpec&) const = default;
};

struct FunctionSignature {
    std::string name;
    std::vector<ParamSpec> params;
    std::string description;
    bool operator==(const FunctionSignature&) const = default;
};

struct FunctionLibrary {
    std::vector<FunctionSignature> signatures;

    bool empty() const { return signatures.empty(); }
    std::size_t size() const { return signatures.size(); }
    const FunctionSignature* find(std::string_view name) const;
    std::vector<std::string> names() const;
    bool operator==(const FunctionLibrary&) const = default;
};

enum class DiagnosticCode {
    Syntax,
    UndefinedFunction,
    NoFunctions,
    NoArgs,
    MissingUnits,
};

std::string_view to_string(DiagnosticCode code);
std::optional<DiagnosticCode> diagnostic_code_from(std::string_view name);

struct Diagnostic {
    DiagnosticCode code = DiagnosticCode::Syntax;
    int line = 1;
    std::string message;
};

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

struct ProgramParse {
    std::optional<PseudoProgram> program;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return program.has_value(); }
};

struct CallParse {
    std::optional<PseudoCall> call;
    std::optional<Diagnostic> diagnostic;
    bool ok() const { return call.has_value(); }
};

struct LibraryParse {
    std::optional<FunctionLibrary> library;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return library.has_value(); }
};

// Grammar, one statement per line:
//   statement := [ident "="] ident "(" kwargs? ")"
//   kwarg     := ident "=" literal
//   literal   := string | number | ident | "[" literal ("," literal)* "]"
// "#" starts a comment; blank lines are ignored. Ident argument values must
// refer to a result name bound by an earlier call.
ProgramParse parse_program(std::string_view text);

// Exactly one statement; anything else is a syntax error.
CallParse parse_single_call(std::string_view text);

// Signature format, one per function:
//   def Name(p1, p2):
//       "what the function does"
// The description line is optional.
LibraryParse parse_signatures(std::string_view text);

// Canonical text. parse_program(render_program(p)) reproduces p exactly
// (AST equality, line numbers aside).
std::string render_program(const PseudoProgram& program);
std::string render_call(const PseudoCall& call);
std::string render_library(const FunctionLibrary& library);

struct ValidationPolicy {
    bool require_args = true;
    bool require_units = true;
    std::vector<std::string> unitless_params;    // parameter names exempt from unit checks
    std::vector<std::string> known_unit_tokens;  // used in missing-unit hints

    static ValidationPolicy defaults();
    // Only undefined-function / empty-library checks; used by the generation
    // feedback loop.
    static ValidationPolicy structural_only();
};

// One diagnostic per violation; empty result means valid.
std::vector<Diagnostic> validate(const PseudoProgram& program,
                                 const FunctionLibrary& library,
                                 const ValidationPolicy& policy);

}  // namespace protoeval::dsl
