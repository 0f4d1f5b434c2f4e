#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "protoeval/dsl.hpp"

// Protocol records in the published JSON schema, the pre-publication
// filtering rules, and corpus statistics.

namespace protoeval::data {

enum class ReviewStatus { Unreviewed, Verified, Edited };

std::string_view to_string(ReviewStatus status);
std::optional<ReviewStatus> review_status_from(std::string_view name);

struct ProtocolRecord {
    std::string id;
    std::string title;
    std::string description;
    std::optional<std::string> generated_description;
    std::vector<std::string> steps;
    dsl::FunctionLibrary library;
    dsl::PseudoProgram gold_program;
    ReviewStatus review_status = ReviewStatus::Unreviewed;
    int edit_count = 0;

    // Picks the generated description when asked for and present.
    const std::string& description_for(bool generated) const;
};

// Scraped record before translation; carries the scraper's content flags.
struct RawProtocol {
    std::string id;
    std::string title;
    std::string description;
    std::vector<std::string> steps;
    bool has_linked_files = false;
    bool has_images = false;
    bool has_tables = false;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadResult {
    std::vector<ProtocolRecord> records;
    // one message per record excluded because its gold program failed
    // validation
    std::vector<std::string> warnings;
};

// path: a .json file (object or array of objects) or a directory of .json
// files. Pseudocode and signatures are embedded as canonical DSL text.
LoadResult load_dataset(const std::string& path);
std::vector<RawProtocol> load_raw_protocols(const std::string& path);

void write_dataset(const std::vector<ProtocolRecord>& records, const std::string& path);
void write_raw_protocols(const std::vector<RawProtocol>& records, const std::string& path);

std::string record_to_json(const ProtocolRecord& record);
ProtocolRecord record_from_json(const std::string& json_text);

struct Rejection {
    RawProtocol record;
    std::string reason;
};

struct FilterResult {
    std::vector<RawProtocol> kept;
    std::vector<Rejection> rejected;
};

// Drops records with an empty description, any content flag set, or fewer
// than three steps. Each rejection carries the rule that fired.
FilterResult filter_protocols(const std::vector<RawProtocol>& raw);

struct DatasetStats {
    std::size_t protocol_count = 0;
    double avg_steps = 0.0;
    double avg_protocol_tokens = 0.0;
    double avg_tokens_per_step = 0.0;
    double avg_tokens_original_description = 0.0;
    double avg_tokens_generated_description = 0.0;
    double avg_pseudofunctions_per_protocol = 0.0;
    double avg_pseudofunctions_per_step = 0.0;
    double avg_pseudocode_lines = 0.0;
};

using Tokenizer = std::function<std::size_t(const std::string&)>;

// Word/number/punctuation splitter used when no model tokenizer is supplied.
std::size_t default_token_count(const std::string& text);

// Arithmetic means over records; per-step figures weight every step in the
// corpus equally. Protocol length counts step text only (title and
// description are reported separately).
DatasetStats compute_stats(const std::vector<ProtocolRecord>& records,
                           const Tokenizer& tokenizer = default_token_count);

std::string stats_to_json(const DatasetStats& stats);

}  // namespace protoeval::data
