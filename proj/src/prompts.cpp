#include "protoeval/prompts.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace protoeval::prompts {

namespace {

std::map<std::string, std::string>& registry() {
    static std::map<std::string, std::string> prompts = {
#include "prompt_data.inc"
    };
    return prompts;
}

std::once_flag env_override_flag;

void apply_env_override() {
    std::call_once(env_override_flag, [] {
        const char* dir = std::getenv("PROTOEVAL_PROMPTS");
        if (dir && *dir) load_overrides(dir);
    });
}

}  // namespace

const std::string& get(std::string_view name) {
    apply_env_override();
    auto it = registry().find(std::string(name));
    if (it == registry().end())
        throw std::runtime_error("unknown prompt template '" + std::string(name) + "'");
    return it->second;
}

void load_overrides(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw std::runtime_error("prompt override path is not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        registry()[entry.path().stem().string()] = buffer.str();
    }
}

std::string fill(std::string_view template_text,
                 const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(template_text.size());
    std::size_t i = 0;
    while (i < template_text.size()) {
        char c = template_text[i];
        if (c == '{') {
            std::size_t close = template_text.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string key(template_text.substr(i + 1, close - i - 1));
                auto it = values.find(key);
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

}  // namespace protoeval::prompts
