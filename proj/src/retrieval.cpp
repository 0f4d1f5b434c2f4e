#include "protoeval/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "protoeval/prompts.hpp"

using nlohmann::json;

namespace protoeval::retrieval {

EmbeddingIndex build_index(const std::vector<data::ProtocolRecord>& records,
                           const metrics::Embedder& embed) {
    if (records.empty()) throw std::invalid_argument("build_index: no records");
    EmbeddingIndex index;
    std::set<std::string> seen;
    for (const auto& record : records) {
        if (!seen.insert(record.id).second)
            throw std::invalid_argument("build_index: duplicate protocol id '" + record.id + "'");
        IndexEntry entry{record.id, record.description, embed(record.description)};
        if (index.entries.empty())
            index.dimension = entry.vector.size();
        else if (entry.vector.size() != index.dimension)
            throw std::runtime_error("build_index: embedder returned mixed dimensions");
        index.entries.push_back(std::move(entry));
    }
    return index;
}

std::vector<Neighbor> nearest(const EmbeddingIndex& index, const std::string& query,
                              std::size_t k, const metrics::Embedder& embed) {
    if (index.entries.empty()) throw std::invalid_argument("nearest: empty index");
    if (k < 1) throw std::invalid_argument("nearest: k must be >= 1");
    auto query_vec = embed(query);
    std::vector<Neighbor> all;
    all.reserve(index.entries.size());
    for (const auto& entry : index.entries)
        all.push_back({entry.id, metrics::cosine_similarity(query_vec, entry.vector)});
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return a.id < b.id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

void save_index(const EmbeddingIndex& index, const std::string& path) {
    json doc;
    doc["dimension"] = index.dimension;
    json entries = json::array();
    for (const auto& entry : index.entries)
        entries.push_back(
            {{"id", entry.id}, {"description", entry.description}, {"vector", entry.vector}});
    doc["entries"] = entries;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write index to " + path);
    out << doc.dump(2) << '\n';
}

EmbeddingIndex load_index(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open index file " + path);
    json doc;
    in >> doc;
    EmbeddingIndex index;
    index.dimension = doc.at("dimension").get<std::size_t>();
    for (const auto& entry : doc.at("entries"))
        index.entries.push_back({entry.at("id").get<std::string>(),
                                 entry.at("description").get<std::string>(),
                                 entry.at("vector").get<std::vector<double>>()});
    return index;
}

namespace {

struct Action {
    enum Kind { Search, Final, Malformed } kind = Malformed;
    std::string thought;
    std::string payload;  // query text or program text
};

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

Action parse_action(const std::string& reply) {
    Action action;
    std::size_t search_at = reply.find("SEARCH:");
    std::size_t final_at = reply.find("FINAL:");
    std::size_t marker = std::min(search_at, final_at);
    if (marker == std::string::npos) return action;
    action.thought = trim(reply.substr(0, marker));
    if (marker == search_at) {
        action.kind = Action::Search;
        std::size_t eol = reply.find('\n', search_at);
        std::string query = reply.substr(search_at + 7,
                                         eol == std::string::npos ? std::string::npos
                                                                  : eol - (search_at + 7));
        action.payload = trim(query);
    } else {
        action.kind = Action::Final;
        action.payload = strip_fences(reply.substr(final_at + 6));
    }
    return action;
}

const data::ProtocolRecord* find_record(const std::vector<data::ProtocolRecord>& dataset,
                                        const std::string& id) {
    for (const auto& record : dataset)
        if (record.id == id) return &record;
    return nullptr;
}

}  // namespace

AgentTrace agent_generate(const std::string& goal, const EmbeddingIndex& index,
                          const std::vector<data::ProtocolRecord>& dataset, const ChatFn& chat,
                          const metrics::Embedder& embed, const AgentOptions& options) {
    if (trim(goal).empty()) throw std::invalid_argument("agent_generate: empty goal");
    if (options.max_tool_calls < 1)
        throw std::invalid_argument("agent_generate: max_tool_calls must be >= 1");

    llm::ChatRequest request;
    request.model_id = options.model_id;
    request.temperature = 0.0;
    request.messages.push_back({"user", prompts::fill(prompts::get("agent"), {{"goal", goal}})});

    AgentTrace trace;
    dsl::FunctionLibrary retrieved_library;
    std::vector<std::string> retrieved_ids;

    int searches = 0;
    bool repair_used = false;
    bool reminder_used = false;
    // generous turn cap so a chatty model cannot loop forever
    int max_turns = options.max_tool_calls + 4;

    for (int turn = 0; turn < max_turns; ++turn) {
        std::string reply = chat(request);
        Action action = parse_action(reply);

        if (action.kind == Action::Malformed) {
            if (reminder_used)
                throw AgentFailed("agent reply had neither SEARCH: nor FINAL: marker");
            reminder_used = true;
            request.messages.push_back({"assistant", reply});
            request.messages.push_back(
                {"user", "Reply with either \"SEARCH: <query>\" or \"FINAL:\" followed by a "
                         "fenced code block."});
            continue;
        }

        if (action.kind == Action::Search) {
            if (searches >= options.max_tool_calls)
                throw AgentFailed("agent exhausted its tool budget of " +
                                  std::to_string(options.max_tool_calls) + " searches");
            ++searches;
            auto hits = nearest(index, action.payload, options.results_per_search, embed);
            std::ostringstream result;
            for (const auto& hit : hits) {
                const auto* record = find_record(dataset, hit.id);
                if (!record) continue;
                if (std::find(retrieved_ids.begin(), retrieved_ids.end(), record->id) ==
                    retrieved_ids.end()) {
                    retrieved_ids.push_back(record->id);
                    for (const auto& sig : record->library.signatures)
                        if (!retrieved_library.find(sig.name))
                            retrieved_library.signatures.push_back(sig);
                }
                result << "Protocol " << record->id << ": " << record->title << '\n'
                       << record->description << '\n'
                       << "Pseudofunctions:\n"
                       << dsl::render_library(record->library) << "\n\n";
            }
            std::string tool_result = result.str();
            trace.steps.push_back({action.thought, "SEARCH: " + action.payload, tool_result});
            request.messages.push_back({"assistant", reply});
            request.messages.push_back({"user", "Search results:\n" + tool_result});
            continue;
        }

        // FINAL
        auto parsed = dsl::parse_program(action.payload);
        std::vector<dsl::Diagnostic> diags = parsed.diagnostics;
        if (parsed.ok()) {
            auto validation =
                dsl::validate(*parsed.program, retrieved_library,
                              dsl::ValidationPolicy::structural_only());
            diags.insert(diags.end(), validation.begin(), validation.end());
        }
        if (!diags.empty()) {
            if (repair_used)
                throw AgentFailed("final program invalid after one repair round", diags);
            repair_used = true;
            trace.steps.push_back(
                {action.thought, "FINAL", "rejected: " + dsl::format_diagnostics(diags)});
            request.messages.push_back({"assistant", reply});
            request.messages.push_back(
                {"user", "The final program is invalid:\n" + dsl::format_diagnostics(diags) +
                             "\nReply with FINAL: and a corrected fenced code block, using only "
                             "retrieved pseudofunctions."});
            continue;
        }

        trace.steps.push_back({action.thought, "FINAL", "accepted"});
        trace.final_program = std::move(*parsed.program);
        trace.source_protocol_ids = retrieved_ids;
        return trace;
    }

    throw AgentFailed("agent did not produce a final program within its turn budget");
}

std::string trace_to_json(const AgentTrace& trace) {
    json doc;
    json steps = json::array();
    for (const auto& step : trace.steps)
        steps.push_back({{"thought", step.thought},
                         {"tool_call", step.tool_call},
                         {"tool_result", step.tool_result}});
    doc["steps"] = steps;
    doc["final_program"] = dsl::render_program(trace.final_program);
    doc["source_protocol_ids"] = trace.source_protocol_ids;
    return doc.dump(2);
}

}  // namespace protoeval::retrieval
