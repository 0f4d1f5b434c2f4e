#include "protoeval/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace protoeval::data {

std::string_view to_string(ReviewStatus status) {
    switch (status) {
        case ReviewStatus::Unreviewed: return "unreviewed";
        case ReviewStatus::Verified: return "verified";
        case ReviewStatus::Edited: return "edited";
    }
    return "unreviewed";
}

std::optional<ReviewStatus> review_status_from(std::string_view name) {
    if (name == "unreviewed") return ReviewStatus::Unreviewed;
    if (name == "verified") return ReviewStatus::Verified;
    if (name == "edited") return ReviewStatus::Edited;
    return std::nullopt;
}

const std::string& ProtocolRecord::description_for(bool generated) const {
    if (generated && generated_description) return *generated_description;
    return description;
}

namespace {

[[noreturn]] void schema_fail(const std::string& record_id, const std::string& field,
                              const std::string& what) {
    throw SchemaError("record '" + (record_id.empty() ? "?" : record_id) + "': field '" + field +
                      "' " + what);
}

std::string require_string(const json& obj, const std::string& field, const std::string& id) {
    if (!obj.contains(field) || !obj[field].is_string())
        schema_fail(id, field, "missing or not a string");
    return obj[field].get<std::string>();
}

std::vector<std::string> require_string_array(const json& obj, const std::string& field,
                                              const std::string& id) {
    if (!obj.contains(field) || !obj[field].is_array())
        schema_fail(id, field, "missing or not an array");
    std::vector<std::string> out;
    for (const auto& item : obj[field]) {
        if (!item.is_string()) schema_fail(id, field, "contains a non-string element");
        out.push_back(item.get<std::string>());
    }
    return out;
}

json record_json(const ProtocolRecord& r) {
    json obj;
    obj["id"] = r.id;
    obj["title"] = r.title;
    obj["description"] = r.description;
    if (r.generated_description)
        obj["generated_description"] = *r.generated_description;
    else
        obj["generated_description"] = nullptr;
    obj["steps"] = r.steps;
    obj["pseudofunctions"] = dsl::render_library(r.library);
    obj["pseudocode"] = dsl::render_program(r.gold_program);
    obj["review_status"] = std::string(to_string(r.review_status));
    obj["edit_count"] = r.edit_count;
    return obj;
}

ProtocolRecord record_from(const json& obj) {
    if (!obj.is_object()) throw SchemaError("protocol entry is not a JSON object");
    std::string id = obj.contains("id") && obj["id"].is_string() ? obj["id"].get<std::string>() : "";
    if (id.empty()) schema_fail(id, "id", "missing or not a string");

    ProtocolRecord r;
    r.id = id;
    r.title = require_string(obj, "title", id);
    r.description = require_string(obj, "description", id);
    if (obj.contains("generated_description") && !obj["generated_description"].is_null()) {
        if (!obj["generated_description"].is_string())
            schema_fail(id, "generated_description", "not a string or null");
        r.generated_description = obj["generated_description"].get<std::string>();
    }
    r.steps = require_string_array(obj, "steps", id);

    std::string signatures_text = require_string(obj, "pseudofunctions", id);
    auto lib = dsl::parse_signatures(signatures_text);
    if (!lib.ok())
        schema_fail(id, "pseudofunctions",
                    "does not parse: " + dsl::format_diagnostics(lib.diagnostics));
    r.library = std::move(*lib.library);

    std::string program_text = require_string(obj, "pseudocode", id);
    auto prog = dsl::parse_program(program_text);
    if (!prog.ok())
        schema_fail(id, "pseudocode", "does not parse: " + dsl::format_diagnostics(prog.diagnostics));
    r.gold_program = std::move(*prog.program);

    std::string status = require_string(obj, "review_status", id);
    auto parsed_status = review_status_from(status);
    if (!parsed_status) schema_fail(id, "review_status", "has unknown value '" + status + "'");
    r.review_status = *parsed_status;

    if (!obj.contains("edit_count") || !obj["edit_count"].is_number_integer())
        schema_fail(id, "edit_count", "missing or not an integer");
    r.edit_count = obj["edit_count"].get<int>();
    if (r.edit_count < 0) schema_fail(id, "edit_count", "is negative");
    return r;
}

RawProtocol raw_from(const json& obj) {
    if (!obj.is_object()) throw SchemaError("protocol entry is not a JSON object");
    std::string id = obj.contains("id") && obj["id"].is_string() ? obj["id"].get<std::string>() : "";
    if (id.empty()) schema_fail(id, "id", "missing or not a string");
    RawProtocol r;
    r.id = id;
    r.title = require_string(obj, "title", id);
    r.description = require_string(obj, "description", id);
    r.steps = require_string_array(obj, "steps", id);
    auto flag = [&](const char* field) {
        if (!obj.contains(field)) return false;
        if (!obj[field].is_boolean()) schema_fail(id, field, "not a boolean");
        return obj[field].get<bool>();
    };
    r.has_linked_files = flag("has_linked_files");
    r.has_images = flag("has_images");
    r.has_tables = flag("has_tables");
    return r;
}

json raw_json(const RawProtocol& r) {
    json obj;
    obj["id"] = r.id;
    obj["title"] = r.title;
    obj["description"] = r.description;
    obj["steps"] = r.steps;
    obj["has_linked_files"] = r.has_linked_files;
    obj["has_images"] = r.has_images;
    obj["has_tables"] = r.has_tables;
    return obj;
}

std::vector<json> read_protocol_objects(const std::string& path) {
    std::vector<json> objects;
    auto read_file = [&](const fs::path& file) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open " + file.string());
        json parsed;
        try {
            in >> parsed;
        } catch (const json::exception& e) {
            throw SchemaError(file.string() + ": invalid JSON: " + e.what());
        }
        if (parsed.is_array()) {
            for (auto& item : parsed) objects.push_back(std::move(item));
        } else {
            objects.push_back(std::move(parsed));
        }
    };

    fs::path p(path);
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(p))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) read_file(file);
    } else if (fs::is_regular_file(p)) {
        read_file(p);
    } else {
        throw std::runtime_error("dataset path does not exist: " + path);
    }
    return objects;
}

}  // namespace

LoadResult load_dataset(const std::string& path) {
    LoadResult result;
    std::set<std::string> seen_ids;
    for (const auto& obj : read_protocol_objects(path)) {
        ProtocolRecord record = record_from(obj);
        if (seen_ids.count(record.id))
            throw SchemaError("record '" + record.id + "': field 'id' duplicates an earlier record");
        seen_ids.insert(record.id);

        auto diags = dsl::validate(record.gold_program, record.library,
                                   dsl::ValidationPolicy::defaults());
        if (!diags.empty()) {
            result.warnings.push_back("record '" + record.id +
                                      "' excluded: gold program fails validation: " +
                                      dsl::format_diagnostics(diags));
            continue;
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

std::vector<RawProtocol> load_raw_protocols(const std::string& path) {
    std::vector<RawProtocol> records;
    std::set<std::string> seen_ids;
    for (const auto& obj : read_protocol_objects(path)) {
        RawProtocol record = raw_from(obj);
        if (seen_ids.count(record.id))
            throw SchemaError("record '" + record.id + "': field 'id' duplicates an earlier record");
        seen_ids.insert(record.id);
        records.push_back(std::move(record));
    }
    return records;
}

void write_dataset(const std::vector<ProtocolRecord>& records, const std::string& path) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_json(r));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << arr.dump(2) << '\n';
}

void write_raw_protocols(const std::vector<RawProtocol>& records, const std::string& path) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(raw_json(r));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << arr.dump(2) << '\n';
}

std::string record_to_json(const ProtocolRecord& record) { return record_json(record).dump(2); }

ProtocolRecord record_from_json(const std::string& json_text) {
    return record_from(json::parse(json_text));
}

FilterResult filter_protocols(const std::vector<RawProtocol>& raw) {
    FilterResult result;
    for (const auto& record : raw) {
        std::string reason;
        if (record.description.empty())
            reason = "no description";
        else if (record.has_linked_files)
            reason = "contains linked files";
        else if (record.has_images)
            reason = "contains images";
        else if (record.has_tables)
            reason = "contains tables";
        else if (record.steps.size() < 3)
            reason = "fewer than three steps";

        if (reason.empty())
            result.kept.push_back(record);
        else
            result.rejected.push_back({record, reason});
    }
    return result;
}

std::size_t default_token_count(const std::string& text) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (std::isalnum(c) || c == '_') {
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                ++i;
        } else {
            ++i;
        }
        ++count;
    }
    return count;
}

DatasetStats compute_stats(const std::vector<ProtocolRecord>& records, const Tokenizer& tokenizer) {
    if (records.empty()) throw std::invalid_argument("compute_stats: no records");

    DatasetStats stats;
    stats.protocol_count = records.size();

    double total_steps = 0.0;
    double total_step_tokens = 0.0;
    double sum_protocol_tokens = 0.0;
    double sum_description_tokens = 0.0;
    double sum_generated_tokens = 0.0;
    std::size_t generated_count = 0;
    double total_functions = 0.0;
    double sum_functions = 0.0;
    double sum_lines = 0.0;

    for (const auto& r : records) {
        total_steps += static_cast<double>(r.steps.size());
        double step_tokens = 0.0;
        for (const auto& step : r.steps) step_tokens += static_cast<double>(tokenizer(step));
        total_step_tokens += step_tokens;
        sum_protocol_tokens += step_tokens;
        sum_description_tokens += static_cast<double>(tokenizer(r.description));
        if (r.generated_description) {
            sum_generated_tokens += static_cast<double>(tokenizer(*r.generated_description));
            ++generated_count;
        }
        total_functions += static_cast<double>(r.library.size());
        sum_functions += static_cast<double>(r.library.size());
        sum_lines += static_cast<double>(r.gold_program.size());
    }

    double n = static_cast<double>(records.size());
    stats.avg_steps = total_steps / n;
    stats.avg_protocol_tokens = sum_protocol_tokens / n;
    stats.avg_tokens_per_step = total_steps > 0 ? total_step_tokens / total_steps : 0.0;
    stats.avg_tokens_original_description = sum_description_tokens / n;
    stats.avg_tokens_generated_description =
        generated_count > 0 ? sum_generated_tokens / static_cast<double>(generated_count) : 0.0;
    stats.avg_pseudofunctions_per_protocol = sum_functions / n;
    stats.avg_pseudofunctions_per_step = total_steps > 0 ? total_functions / total_steps : 0.0;
    stats.avg_pseudocode_lines = sum_lines / n;
    return stats;
}

std::string stats_to_json(const DatasetStats& stats) {
    json obj;
    obj["protocol_count"] = stats.protocol_count;
    obj["avg_steps"] = stats.avg_steps;
    obj["avg_protocol_tokens"] = stats.avg_protocol_tokens;
    obj["avg_tokens_per_step"] = stats.avg_tokens_per_step;
    obj["avg_tokens_original_description"] = stats.avg_tokens_original_description;
    obj["avg_tokens_generated_description"] = stats.avg_tokens_generated_description;
    obj["avg_pseudofunctions_per_protocol"] = stats.avg_pseudofunctions_per_protocol;
    obj["avg_pseudofunctions_per_step"] = stats.avg_pseudofunctions_per_step;
    obj["avg_pseudocode_lines"] = stats.avg_pseudocode_lines;
    return obj.dump(2);
}

}  // namespace protoeval::data
