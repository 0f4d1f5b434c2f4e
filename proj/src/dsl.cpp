#include "protoeval/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

namespace protoeval::dsl {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_numeric_token(std::string_view tok) {
    std::size_t i = 0;
    if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
    bool digits = false;
    while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) { ++i; digits = true; }
    if (i < tok.size() && tok[i] == '.') {
        ++i;
        while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) { ++i; digits = true; }
    }
    if (!digits) return false;
    if (i < tok.size() && (tok[i] == 'e' || tok[i] == 'E')) {
        ++i;
        if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
        bool exp_digits = false;
        while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) { ++i; exp_digits = true; }
        if (!exp_digits) return false;
    }
    return i == tok.size();
}

// Splits quoted content into tokens for quantity detection: numeric runs,
// letter runs, and single punctuation characters. "10mL" -> {"10", "mL"}.
std::vector<std::string> classify_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    auto starts_number = [&](std::size_t k) {
        if (k >= text.size()) return false;
        char c = text[k];
        if (std::isdigit(static_cast<unsigned char>(c))) return true;
        if ((c == '+' || c == '-' || c == '.') && k + 1 < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[k + 1])))
            return true;
        return false;
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (starts_number(i)) {
            std::size_t j = i;
            if (text[j] == '+' || text[j] == '-') ++j;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && text[j] == '.') {
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            tokens.emplace_back(text.substr(i, j - i));
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            tokens.emplace_back(text.substr(i, j - i));
            i = j;
        } else {
            tokens.emplace_back(1, c);
            ++i;
        }
    }
    return tokens;
}

std::string render_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string escape_string(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

// --- line tokenizer ---------------------------------------------------------

enum class Tok { Ident, Number, String, LParen, RParen, LBracket, RBracket, Equals, Comma, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;   // ident name or decoded string content
    double number = 0;  // Tok::Number
    std::size_t col = 0;
};

struct LineLexer {
    explicit LineLexer(std::string_view text) : line(text) {}

    std::string_view line;
    std::size_t pos = 0;
    std::optional<std::string> comment;
    std::string error;

    bool failed() const { return !error.empty(); }

    void fail(std::size_t at, const std::string& msg) {
        if (error.empty()) error = msg + " (column " + std::to_string(at + 1) + ")";
    }

    Token next() {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
        Token t;
        t.col = pos;
        if (pos >= line.size()) return t;
        char c = line[pos];
        if (c == '#') {
            std::string_view rest = line.substr(pos + 1);
            std::size_t b = rest.find_first_not_of(" \t");
            std::size_t e = rest.find_last_not_of(" \t\r");
            comment = (b == std::string_view::npos) ? std::string()
                                                    : std::string(rest.substr(b, e - b + 1));
            pos = line.size();
            return t;
        }
        if (is_ident_start(c)) {
            std::size_t j = pos;
            while (j < line.size() && is_ident_char(line[j])) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(line.substr(pos, j - pos));
            pos = j;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
            std::size_t j = pos;
            if (line[j] == '+' || line[j] == '-') ++j;
            std::size_t digits_from = j;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
            if (j < line.size() && line[j] == '.') {
                ++j;
                while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
            }
            if (j == digits_from || (j == digits_from + 1 && line[digits_from] == '.')) {
                fail(pos, "unexpected character '" + std::string(1, c) + "'");
                return t;
            }
            if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
                std::size_t exp_from = k;
                while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) ++k;
                if (k > exp_from) j = k;
            }
            std::string_view num = line.substr(pos, j - pos);
            double value = 0;
            auto first = num.data();
            auto res = std::from_chars(first, first + num.size(), value);
            if (res.ec != std::errc() || res.ptr != first + num.size()) {
                fail(pos, "malformed number '" + std::string(num) + "'");
                return t;
            }
            t.kind = Tok::Number;
            t.number = value;
            pos = j;
            return t;
        }
        if (c == '"') {
            std::string content;
            std::size_t j = pos + 1;
            while (j < line.size() && line[j] != '"') {
                if (line[j] == '\\') {
                    if (j + 1 >= line.size()) {
                        fail(j, "dangling escape in string");
                        return t;
                    }
                    char e = line[j + 1];
                    switch (e) {
                        case '"': content.push_back('"'); break;
                        case '\\': content.push_back('\\'); break;
                        case 'n': content.push_back('\n'); break;
                        case 't': content.push_back('\t'); break;
                        default:
                            fail(j, std::string("unsupported escape '\\") + e + "'");
                            return t;
                    }
                    j += 2;
                } else {
                    content.push_back(line[j]);
                    ++j;
                }
            }
            if (j >= line.size()) {
                fail(pos, "unterminated string literal");
                return t;
            }
            t.kind = Tok::String;
            t.text = std::move(content);
            pos = j + 1;
            return t;
        }
        switch (c) {
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case '[': t.kind = Tok::LBracket; break;
            case ']': t.kind = Tok::RBracket; break;
            case '=': t.kind = Tok::Equals; break;
            case ',': t.kind = Tok::Comma; break;
            default:
                fail(pos, "unexpected character '" + std::string(1, c) + "'");
                return t;
        }
        ++pos;
        return t;
    }
};

struct StatementParser {
    LineLexer lex;
    Token cur;
    std::string error;

    explicit StatementParser(std::string_view line) : lex(line) { advance(); }

    void advance() {
        cur = lex.next();
        if (lex.failed() && error.empty()) error = lex.error;
    }

    bool fail(const std::string& msg) {
        if (error.empty()) error = msg;
        return false;
    }

    bool parse_literal(ValueLiteral& out) {
        if (!error.empty()) return false;
        switch (cur.kind) {
            case Tok::String:
                out = ValueLiteral::from_quoted(cur.text);
                advance();
                return true;
            case Tok::Number:
                out = ValueLiteral::bare_number(cur.number);
                advance();
                return true;
            case Tok::Ident: {
                std::string name = cur.text;
                advance();
                if (cur.kind == Tok::LParen) return fail("nested call '" + name + "(...)' is not allowed");
                out = ValueLiteral::ident(std::move(name));
                return true;
            }
            case Tok::LBracket: {
                advance();
                std::vector<ValueLiteral> items;
                if (cur.kind == Tok::RBracket) return fail("empty list literal");
                while (true) {
                    ValueLiteral item;
                    if (!parse_literal(item)) return false;
                    items.push_back(std::move(item));
                    if (cur.kind == Tok::Comma) {
                        advance();
                        continue;
                    }
                    break;
                }
                if (cur.kind != Tok::RBracket) return fail("expected ']' to close list");
                advance();
                out = ValueLiteral::list(std::move(items));
                return true;
            }
            default:
                return fail("expected an argument value");
        }
    }

    bool parse_statement(PseudoCall& call) {
        if (cur.kind != Tok::Ident) return fail("statement must start with an identifier");
        std::string first = cur.text;
        advance();
        if (cur.kind == Tok::Equals) {
            call.result_name = first;
            advance();
            if (cur.kind != Tok::Ident) return fail("expected a function name after '='");
            call.callee = cur.text;
            advance();
        } else {
            call.callee = first;
        }
        if (cur.kind != Tok::LParen) return fail("expected '(' after function name");
        advance();
        if (cur.kind != Tok::RParen) {
            while (true) {
                if (cur.kind != Tok::Ident) {
                    if (cur.kind == Tok::String || cur.kind == Tok::Number || cur.kind == Tok::LBracket)
                        return fail("positional arguments are not allowed; use name=value");
                    return fail("expected an argument name");
                }
                ArgumentBinding arg;
                arg.name = cur.text;
                advance();
                if (cur.kind != Tok::Equals) return fail("expected '=' after argument name '" + arg.name + "'");
                advance();
                if (!parse_literal(arg.value)) return false;
                for (const auto& existing : call.args)
                    if (existing.name == arg.name)
                        return fail("duplicate argument name '" + arg.name + "'");
                call.args.push_back(std::move(arg));
                if (cur.kind == Tok::Comma) {
                    advance();
                    continue;
                }
                break;
            }
        }
        if (cur.kind != Tok::RParen) return fail("expected ')' to close call");
        advance();
        if (cur.kind != Tok::End) return fail("unexpected trailing input after ')'");
        if (lex.comment && !lex.comment->empty()) call.comment = lex.comment;
        return error.empty();
    }
};

struct Line {
    std::string_view text;
    int number;
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t start = 0;
    int number = 1;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.push_back({text.substr(start), number});
            break;
        }
        lines.push_back({text.substr(start, end - start), number});
        start = end + 1;
        ++number;
    }
    return lines;
}

bool blank_or_comment_only(std::string_view line, std::optional<std::string>* comment = nullptr) {
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string_view::npos) return true;
    if (line[i] == '#') {
        if (comment) *comment = std::string(line.substr(i + 1));
        return true;
    }
    return false;
}

void collect_ident_refs(const ValueLiteral& v, std::vector<const std::string*>& out) {
    if (v.kind == ValueKind::Ident) out.push_back(&v.text);
    for (const auto& item : v.items) collect_ident_refs(item, out);
}

}  // namespace

ValueLiteral ValueLiteral::quantity(std::string s) {
    ValueLiteral v;
    v.kind = ValueKind::Quantity;
    v.text = std::move(s);
    return v;
}

ValueLiteral ValueLiteral::bare_number(double value) {
    ValueLiteral v;
    v.kind = ValueKind::BareNumber;
    v.number = value;
    return v;
}

ValueLiteral ValueLiteral::text_value(std::string s) {
    ValueLiteral v;
    v.kind = ValueKind::Text;
    v.text = std::move(s);
    return v;
}

ValueLiteral ValueLiteral::ident(std::string name) {
    ValueLiteral v;
    v.kind = ValueKind::Ident;
    v.text = std::move(name);
    return v;
}

ValueLiteral ValueLiteral::list(std::vector<ValueLiteral> items) {
    ValueLiteral v;
    v.kind = ValueKind::List;
    v.items = std::move(items);
    return v;
}

ValueLiteral ValueLiteral::from_quoted(std::string s) {
    auto tokens = classify_tokens(s);
    bool numeric = false, other = false;
    for (const auto& tok : tokens)
        (is_numeric_token(tok) ? numeric : other) = true;
    return numeric && other ? quantity(std::move(s)) : text_value(std::move(s));
}

bool ValueLiteral::operator==(const ValueLiteral& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case ValueKind::BareNumber: return number == o.number;
        case ValueKind::List: return items == o.items;
        default: return text == o.text;
    }
}

std::string ValueLiteral::value_text() const {
    switch (kind) {
        case ValueKind::Quantity:
        case ValueKind::Text:
        case ValueKind::Ident:
            return text;
        case ValueKind::BareNumber:
            return render_number(number);
        case ValueKind::List: {
            std::string out = "[";
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) out += ", ";
                out += items[i].value_text();
            }
            out += "]";
            return out;
        }
    }
    return {};
}

const ArgumentBinding* PseudoCall::find_arg_ci(std::string_view name) const {
    std::string wanted = to_lower(name);
    for (const auto& arg : args)
        if (to_lower(arg.name) == wanted) return &arg;
    return nullptr;
}

std::vector<std::string> PseudoProgram::callee_names() const {
    std::vector<std::string> names;
    names.reserve(calls.size());
    for (const auto& call : calls) names.push_back(call.callee);
    return names;
}

bool same_ast(const PseudoCall& a, const PseudoCall& b) {
    return a.callee == b.callee && a.args == b.args && a.result_name == b.result_name &&
           a.comment == b.comment;
}

bool same_ast(const PseudoProgram& a, const PseudoProgram& b) {
    if (a.calls.size() != b.calls.size()) return false;
    for (std::size_t i = 0; i < a.calls.size(); ++i)
        if (!same_ast(a.calls[i], b.calls[i])) return false;
    return true;
}

const FunctionSignature* FunctionLibrary::find(std::string_view name) const {
    for (const auto& sig : signatures)
        if (sig.name == name) return &sig;
    return nullptr;
}

std::vector<std::string> FunctionLibrary::names() const {
    std::vector<std::string> out;
    out.reserve(signatures.size());
    for (const auto& sig : signatures) out.push_back(sig.name);
    return out;
}

std::string_view to_string(DiagnosticCode code) {
    switch (code) {
        case DiagnosticCode::Syntax: return "E_SYNTAX";
        case DiagnosticCode::UndefinedFunction: return "E_UNDEFINED_FUNCTION";
        case DiagnosticCode::NoFunctions: return "E_NO_FUNCTIONS";
        case DiagnosticCode::NoArgs: return "E_NO_ARGS";
        case DiagnosticCode::MissingUnits: return "E_MISSING_UNITS";
    }
    return "E_SYNTAX";
}

std::optional<DiagnosticCode> diagnostic_code_from(std::string_view name) {
    for (auto code : {DiagnosticCode::Syntax, DiagnosticCode::UndefinedFunction,
                      DiagnosticCode::NoFunctions, DiagnosticCode::NoArgs,
                      DiagnosticCode::MissingUnits})
        if (to_string(code) == name) return code;
    return std::nullopt;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::ostringstream out;
    for (std::size_t i = 0; i < diags.size(); ++i) {
        if (i) out << '\n';
        out << to_string(diags[i].code) << " line " << diags[i].line << ": " << diags[i].message;
    }
    return out.str();
}

ProgramParse parse_program(std::string_view text) {
    ProgramParse result;
    PseudoProgram program;
    std::unordered_set<std::string> defined;

    for (const Line& line : split_lines(text)) {
        if (blank_or_comment_only(line.text)) continue;
        StatementParser parser(line.text);
        PseudoCall call;
        if (!parser.parse_statement(call)) {
            result.diagnostics.push_back({DiagnosticCode::Syntax, line.number, parser.error});
            continue;
        }
        call.line = line.number;
        std::vector<const std::string*> refs;
        for (const auto& arg : call.args) collect_ident_refs(arg.value, refs);
        for (const std::string* ref : refs) {
            if (!defined.count(*ref))
                result.diagnostics.push_back(
                    {DiagnosticCode::Syntax, line.number,
                     "reference to undefined result name '" + *ref + "'"});
        }
        if (call.result_name) defined.insert(*call.result_name);
        program.calls.push_back(std::move(call));
    }

    if (result.diagnostics.empty()) result.program = std::move(program);
    return result;
}

CallParse parse_single_call(std::string_view text) {
    CallParse result;
    std::optional<PseudoCall> first;
    for (const Line& line : split_lines(text)) {
        if (blank_or_comment_only(line.text)) continue;
        StatementParser parser(line.text);
        PseudoCall call;
        if (!parser.parse_statement(call)) {
            result.diagnostic = Diagnostic{DiagnosticCode::Syntax, line.number, parser.error};
            return result;
        }
        call.line = line.number;
        if (first) {
            result.diagnostic = Diagnostic{DiagnosticCode::Syntax, line.number,
                                           "expected exactly one statement, found more"};
            return result;
        }
        first = std::move(call);
    }
    if (!first) {
        result.diagnostic = Diagnostic{DiagnosticCode::Syntax, 1, "no statement found"};
        return result;
    }
    result.call = std::move(first);
    return result;
}

namespace {

// def Name(p1, p2):   with an optional trailing comment
bool parse_def_line(std::string_view line, FunctionSignature& sig, std::string& error) {
    LineLexer lex(line);
    auto next = [&]() { return lex.next(); };
    Token t = next();
    if (t.kind != Tok::Ident || t.text != "def") {
        error = "expected 'def'";
        return false;
    }
    t = next();
    if (t.kind != Tok::Ident) {
        error = "expected a function name after 'def'";
        return false;
    }
    sig.name = t.text;
    t = next();
    if (t.kind != Tok::LParen) {
        error = "expected '(' after function name";
        return false;
    }
    t = next();
    if (t.kind != Tok::RParen) {
        while (true) {
            if (t.kind != Tok::Ident) {
                error = "expected a parameter name";
                return false;
            }
            for (const auto& p : sig.params)
                if (p.name == t.text) {
                    error = "duplicate parameter name '" + t.text + "'";
                    return false;
                }
            sig.params.push_back({t.text, std::nullopt});
            t = next();
            if (t.kind == Tok::Comma) {
                t = next();
                continue;
            }
            break;
        }
        if (t.kind != Tok::RParen) {
            error = "expected ')' to close parameter list";
            return false;
        }
    }
    // ':' is not a lexer token; check the remaining text manually.
    std::string_view rest = line.substr(lex.pos);
    std::size_t i = rest.find_first_not_of(" \t");
    if (i == std::string_view::npos || rest[i] != ':') {
        error = "expected ':' after signature";
        return false;
    }
    std::string_view tail = rest.substr(i + 1);
    std::size_t j = tail.find_first_not_of(" \t\r");
    if (j != std::string_view::npos && tail[j] != '#') {
        error = "unexpected trailing input after ':'";
        return false;
    }
    if (lex.failed()) {
        error = lex.error;
        return false;
    }
    return true;
}

bool parse_description_line(std::string_view line, std::string& out, std::string& error) {
    LineLexer lex(line);
    Token t = lex.next();
    if (t.kind != Tok::String) {
        error = "expected a quoted description line";
        return false;
    }
    Token end = lex.next();
    if (end.kind != Tok::End) {
        error = "unexpected trailing input after description";
        return false;
    }
    if (lex.failed()) {
        error = lex.error;
        return false;
    }
    out = t.text;
    return true;
}

}  // namespace

LibraryParse parse_signatures(std::string_view text) {
    LibraryParse result;
    FunctionLibrary library;
    auto lines = split_lines(text);

    std::size_t i = 0;
    while (i < lines.size()) {
        const Line& line = lines[i];
        if (blank_or_comment_only(line.text)) {
            ++i;
            continue;
        }
        bool indented = line.text.size() && (line.text[0] == ' ' || line.text[0] == '\t');
        if (indented) {
            result.diagnostics.push_back({DiagnosticCode::Syntax, line.number,
                                          "unexpected indented line outside a definition"});
            ++i;
            continue;
        }
        FunctionSignature sig;
        std::string error;
        if (!parse_def_line(line.text, sig, error)) {
            result.diagnostics.push_back({DiagnosticCode::Syntax, line.number, error});
            ++i;
            continue;
        }
        ++i;
        if (i < lines.size() && !blank_or_comment_only(lines[i].text) &&
            (lines[i].text[0] == ' ' || lines[i].text[0] == '\t')) {
            std::string description;
            if (!parse_description_line(lines[i].text, description, error)) {
                result.diagnostics.push_back({DiagnosticCode::Syntax, lines[i].number, error});
            } else {
                sig.description = std::move(description);
            }
            ++i;
        }
        if (library.find(sig.name)) {
            result.diagnostics.push_back({DiagnosticCode::Syntax, line.number,
                                          "duplicate definition of '" + sig.name + "'"});
            continue;
        }
        library.signatures.push_back(std::move(sig));
    }

    if (library.empty() && result.diagnostics.empty()) {
        result.diagnostics.push_back(
            {DiagnosticCode::NoFunctions, 1, "no pseudofunction definitions found"});
    }
    if (result.diagnostics.empty()) result.library = std::move(library);
    return result;
}

namespace {

std::string render_value(const ValueLiteral& v) {
    switch (v.kind) {
        case ValueKind::Quantity:
        case ValueKind::Text:
            return escape_string(v.text);
        case ValueKind::BareNumber:
            return render_number(v.number);
        case ValueKind::Ident:
            return v.text;
        case ValueKind::List: {
            std::string out = "[";
            for (std::size_t i = 0; i < v.items.size(); ++i) {
                if (i) out += ", ";
                out += render_value(v.items[i]);
            }
            out += "]";
            return out;
        }
    }
    return {};
}

}  // namespace

std::string render_call(const PseudoCall& call) {
    std::string out;
    if (call.result_name) {
        out += *call.result_name;
        out += " = ";
    }
    out += call.callee;
    out += "(";
    for (std::size_t i = 0; i < call.args.size(); ++i) {
        if (i) out += ", ";
        out += call.args[i].name;
        out += "=";
        out += render_value(call.args[i].value);
    }
    out += ")";
    if (call.comment) {
        out += "  # ";
        out += *call.comment;
    }
    return out;
}

std::string render_program(const PseudoProgram& program) {
    std::string out;
    for (std::size_t i = 0; i < program.calls.size(); ++i) {
        if (i) out += "\n";
        out += render_call(program.calls[i]);
    }
    return out;
}

std::string render_library(const FunctionLibrary& library) {
    std::string out;
    for (std::size_t i = 0; i < library.signatures.size(); ++i) {
        const auto& sig = library.signatures[i];
        if (i) out += "\n";
        out += "def ";
        out += sig.name;
        out += "(";
        for (std::size_t p = 0; p < sig.params.size(); ++p) {
            if (p) out += ", ";
            out += sig.params[p].name;
        }
        out += "):";
        if (!sig.description.empty()) {
            out += "\n    ";
            out += escape_string(sig.description);
        }
    }
    return out;
}

ValidationPolicy ValidationPolicy::defaults() {
    ValidationPolicy policy;
    policy.unitless_params = {"count", "cycles", "replicates", "n"};
    policy.known_unit_tokens = {"mL", "uL", "L",   "g",   "mg",  "ug", "kg",  "C",
                                "F",  "K",  "min", "s",   "sec", "h",  "hr",  "hours",
                                "rpm", "x",  "M",  "mM",  "uM",  "nM", "%",   "V"};
    return policy;
}

ValidationPolicy ValidationPolicy::structural_only() {
    ValidationPolicy policy;
    policy.require_args = false;
    policy.require_units = false;
    return policy;
}

namespace {

bool contains_bare_number(const ValueLiteral& v) {
    if (v.kind == ValueKind::BareNumber) return true;
    return std::any_of(v.items.begin(), v.items.end(), contains_bare_number);
}

}  // namespace

std::vector<Diagnostic> validate(const PseudoProgram& program, const FunctionLibrary& library,
                                 const ValidationPolicy& policy) {
    std::vector<Diagnostic> diags;
    std::set<std::string> unitless;
    for (const auto& name : policy.unitless_params) unitless.insert(to_lower(name));

    if (library.empty()) {
        diags.push_back({DiagnosticCode::NoFunctions, 1, "the function library is empty"});
    }

    std::string unit_hint;
    if (!policy.known_unit_tokens.empty()) {
        unit_hint = " (expected a unit such as ";
        for (std::size_t i = 0; i < policy.known_unit_tokens.size() && i < 3; ++i) {
            if (i) unit_hint += ", ";
            unit_hint += policy.known_unit_tokens[i];
        }
        unit_hint += ")";
    }

    for (const auto& call : program.calls) {
        if (!library.empty() && !library.find(call.callee)) {
            diags.push_back({DiagnosticCode::UndefinedFunction, call.line,
                             "call to undefined pseudofunction '" + call.callee + "'"});
        }
        if (policy.require_args && call.args.empty()) {
            diags.push_back({DiagnosticCode::NoArgs, call.line,
                             "call to '" + call.callee + "' has no arguments"});
        }
        if (policy.require_units) {
            for (const auto& arg : call.args) {
                if (unitless.count(to_lower(arg.name))) continue;
                if (!contains_bare_number(arg.value)) continue;
                diags.push_back({DiagnosticCode::MissingUnits, call.line,
                                 "numeric value for '" + arg.name + "' has no units" + unit_hint});
            }
        }
    }
    return diags;
}

}  // namespace protoeval::dsl
