#pragma once

#include <string>
#include <vector>

#include "protoeval/dsl.hpp"
#include "protoeval/rng.hpp"

// Random well-formed programs for round-trip and property tests. Quoted
// values go through ValueLiteral::from_quoted so the generated AST carries
// the same classification the parser would produce.

namespace protoeval::testgen {

inline const std::vector<std::string>& name_pool() {
    static const std::vector<std::string> names = {
        "Mix",       "Spin",    "Dry",        "Incubate", "Transfer",
        "Centrifuge", "Elute",  "AddReagent", "Wash",     "HeatShock"};
    return names;
}

inline const std::vector<std::string>& arg_pool() {
    static const std::vector<std::string> names = {"volume", "speed",  "time", "temperature",
                                                   "sample", "buffer", "count", "target"};
    return names;
}

inline dsl::ValueLiteral random_scalar(rng::Stream& stream,
                                       const std::vector<std::string>& defined) {
    static const std::vector<std::string> quoted = {
        "10 mL", "500 rpm", "4 C",        "overnight", "full speed",
        "30 s",  "2.5 uL",  "ice",        "50% glycerol", "1e3 cells"};
    static const std::vector<double> numbers = {0.0, 5.0, -2.0, 0.1, 3.25, 1e6, -7.5e-3, 42.0};

    switch (stream.below(defined.empty() ? 3 : 4)) {
        case 0:
            return dsl::ValueLiteral::from_quoted(quoted[stream.below(quoted.size())]);
        case 1:
            return dsl::ValueLiteral::bare_number(numbers[stream.below(numbers.size())]);
        case 2:
            return dsl::ValueLiteral::from_quoted("note " + std::to_string(stream.below(100)));
        default:
            return dsl::ValueLiteral::ident(defined[stream.below(defined.size())]);
    }
}

inline dsl::ValueLiteral random_value(rng::Stream& stream,
                                      const std::vector<std::string>& defined) {
    if (stream.below(6) == 0) {
        std::vector<dsl::ValueLiteral> items;
        std::size_t n = 1 + stream.below(3);
        for (std::size_t i = 0; i < n; ++i) items.push_back(random_scalar(stream, defined));
        return dsl::ValueLiteral::list(std::move(items));
    }
    return random_scalar(stream, defined);
}

inline dsl::PseudoProgram random_program(rng::Stream& stream) {
    dsl::PseudoProgram program;
    std::vector<std::string> defined;
    std::size_t call_count = stream.below(7);  // empty programs allowed
    for (std::size_t c = 0; c < call_count; ++c) {
        dsl::PseudoCall call;
        call.callee = name_pool()[stream.below(name_pool().size())];
        std::size_t arg_count = stream.below(5);
        std::vector<std::string> available = arg_pool();
        for (std::size_t a = 0; a < arg_count && !available.empty(); ++a) {
            std::size_t pick = stream.below(available.size());
            dsl::ArgumentBinding arg;
            arg.name = available[pick];
            available.erase(available.begin() + static_cast<long>(pick));
            arg.value = random_value(stream, defined);
            call.args.push_back(std::move(arg));
        }
        if (stream.below(2) == 0) {
            std::string result = "r" + std::to_string(stream.below(20));
            call.result_name = result;
        }
        if (stream.below(4) == 0)
            call.comment = "step note " + std::to_string(stream.below(50));
        call.line = static_cast<int>(c + 1);
        if (call.result_name) defined.push_back(*call.result_name);
        program.calls.push_back(std::move(call));
    }
    return program;
}

inline std::vector<std::string> random_name_sequence(rng::Stream& stream, std::size_t max_len,
                                                     std::size_t alphabet) {
    std::vector<std::string> out;
    std::size_t len = stream.below(max_len + 1);
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(std::string(1, static_cast<char>('A' + stream.below(alphabet))));
    return out;
}

}  // namespace protoeval::testgen
