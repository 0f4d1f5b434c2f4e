#pragma once

#include <map>
#include <string>
#include <string_view>

// Prompt templates live in prompts/*.txt and are embedded at build time;
// PROTOEVAL_PROMPTS (or load_overrides) swaps in an alternative directory.

namespace protoeval::prompts {

// Template text by name ("translate", "next_step", ...). Throws on unknown
// names.
const std::string& get(std::string_view name);

// Replaces embedded templates with files from dir (same <name>.txt layout).
void load_overrides(const std::string& dir);

// Substitutes {key} placeholders. Unknown placeholders are left intact.
std::string fill(std::string_view template_text,
                 const std::map<std::string, std::string>& values);

}  // namespace protoeval::prompts
