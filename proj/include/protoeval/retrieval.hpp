#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "protoeval/dataset.hpp"
#include "protoeval/dsl.hpp"
#include "protoeval/gateway.hpp"
#include "protoeval/metrics.hpp"

// Exact nearest-neighbor index over protocol descriptions, and the
// tool-calling agent that composes new protocols from retrieved
// pseudofunctions.

namespace protoeval::retrieval {

struct IndexEntry {
    std::string id;
    std::string description;
    std::vector<double> vector;
};

struct EmbeddingIndex {
    std::vector<IndexEntry> entries;
    std::size_t dimension = 0;
};

// One entry per record, embedding the original description. Duplicate ids
// are an error.
EmbeddingIndex build_index(const std::vector<data::ProtocolRecord>& records,
                           const metrics::Embedder& embed);

struct Neighbor {
    std::string id;
    double cosine = 0.0;
};

// Top-k by cosine, descending; ties break lexicographically by id; k beyond
// the corpus returns everything. Brute-force scan: the corpus is small and
// exactness keeps runs reproducible.
std::vector<Neighbor> nearest(const EmbeddingIndex& index, const std::string& query,
                              std::size_t k, const metrics::Embedder& embed);

void save_index(const EmbeddingIndex& index, const std::string& path);
EmbeddingIndex load_index(const std::string& path);

struct AgentStep {
    std::string thought;
    std::string tool_call;
    std::string tool_result;
};

struct AgentTrace {
    std::vector<AgentStep> steps;
    dsl::PseudoProgram final_program;
    std::vector<std::string> source_protocol_ids;
};

struct AgentFailed : std::runtime_error {
    std::vector<dsl::Diagnostic> diagnostics;
    AgentFailed(const std::string& what, std::vector<dsl::Diagnostic> diags = {})
        : std::runtime_error(what), diagnostics(std::move(diags)) {}
};

using ChatFn = std::function<std::string(const llm::ChatRequest&)>;

struct AgentOptions {
    std::string model_id = "gpt-4";
    int max_tool_calls = 5;
    std::size_t results_per_search = 3;
};

// Plain-text tool loop: the model answers either "SEARCH: <query>" (served
// through the index) or "FINAL:" with a code block. The final program must
// use only pseudofunctions of retrieved protocols; undefined-function
// diagnostics are fed back once before failing.
AgentTrace agent_generate(const std::string& goal, const EmbeddingIndex& index,
                          const std::vector<data::ProtocolRecord>& dataset, const ChatFn& chat,
                          const metrics::Embedder& embed, const AgentOptions& options = {});

std::string trace_to_json(const AgentTrace& trace);

}  // namespace protoeval::retrieval
