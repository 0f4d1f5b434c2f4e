#include "protoeval/gateway.hpp"

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

using nlohmann::json;

namespace protoeval::llm {

namespace {

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(static_cast<std::size_t>(length) * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void check(const ChatRequest& request) {
    if (request.messages.empty())
        throw std::invalid_argument("chat request has no messages");
    const std::string& first = request.messages.front().role;
    if (first != "system" && first != "user")
        throw std::invalid_argument("first chat message must be system or user, got '" + first +
                                    "'");
    for (const auto& m : request.messages)
        if (m.role != "system" && m.role != "user" && m.role != "assistant")
            throw std::invalid_argument("unknown chat role '" + m.role + "'");
    if (request.temperature < 0)
        throw std::invalid_argument("temperature must be >= 0");
}

void check(const EmbeddingRequest& request) {
    if (request.texts.empty())
        throw std::invalid_argument("embedding request has no texts");
}

json canonical(const ChatRequest& request) {
    json obj;
    obj["kind"] = "chat";
    obj["model"] = request.model_id;
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    obj["messages"] = messages;
    obj["temperature"] = request.temperature;
    obj["seed"] = request.seed ? json(*request.seed) : json(nullptr);
    obj["max_tokens"] = request.max_tokens ? json(*request.max_tokens) : json(nullptr);
    return obj;
}

json canonical(const EmbeddingRequest& request) {
    json obj;
    obj["kind"] = "embed";
    obj["model"] = request.model_id;
    obj["texts"] = request.texts;
    return obj;
}

}  // namespace

std::string fingerprint(const ChatRequest& request) { return sha256_hex(canonical(request).dump()); }

std::string fingerprint(const EmbeddingRequest& request) {
    return sha256_hex(canonical(request).dump());
}

std::string_view to_string(GatewayMode mode) {
    switch (mode) {
        case GatewayMode::Record: return "record";
        case GatewayMode::Replay: return "replay";
        case GatewayMode::Passthrough: return "passthrough";
    }
    return "passthrough";
}

std::optional<GatewayMode> gateway_mode_from(std::string_view name) {
    if (name == "record") return GatewayMode::Record;
    if (name == "replay") return GatewayMode::Replay;
    if (name == "passthrough") return GatewayMode::Passthrough;
    return std::nullopt;
}

// --- HttpProvider -----------------------------------------------------------

HttpProvider::HttpProvider(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {
    if (base_url_.empty()) {
        const char* env = std::getenv("PROTOEVAL_API_BASE");
        base_url_ = env ? env : "";
    }
    if (api_key_.empty()) {
        const char* env = std::getenv("PROTOEVAL_API_KEY");
        api_key_ = env ? env : "";
    }
    if (base_url_.empty())
        throw ProviderError("no API base url (set PROTOEVAL_API_BASE)");
}

std::string HttpProvider::post_json(const std::string& path, const std::string& body) {
    // split base url into origin + path prefix
    std::string origin = base_url_;
    std::string prefix;
    auto scheme_end = origin.find("://");
    auto path_start = origin.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        prefix = origin.substr(path_start);
        origin = origin.substr(0, path_start);
        if (prefix == "/") prefix.clear();
    }

    httplib::Client client(origin);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(prefix + path, headers, body, "application/json");
    if (!res)
        throw ProviderError("network error calling " + origin + prefix + path, true);
    if (res->status == 429 || res->status >= 500)
        throw ProviderError("provider returned status " + std::to_string(res->status), true);
    if (res->status != 200)
        throw ProviderError("provider returned status " + std::to_string(res->status) + ": " +
                            res->body);
    return res->body;
}

std::string HttpProvider::chat(const ChatRequest& request) {
    json body;
    body["model"] = request.model_id;
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = messages;
    body["temperature"] = request.temperature;
    if (request.seed) body["seed"] = *request.seed;
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;

    json reply = json::parse(post_json("/chat/completions", body.dump()));
    if (!reply.contains("choices") || reply["choices"].empty())
        throw ProviderError("chat response has no choices");
    const auto& message = reply["choices"][0]["message"];
    return message.value("content", std::string());
}

std::vector<std::vector<double>> HttpProvider::embed(const EmbeddingRequest& request) {
    json body;
    body["model"] = request.model_id;
    body["input"] = request.texts;
    json reply = json::parse(post_json("/embeddings", body.dump()));
    if (!reply.contains("data") || !reply["data"].is_array())
        throw ProviderError("embedding response has no data array");
    std::vector<std::vector<double>> vectors;
    for (const auto& item : reply["data"])
        vectors.push_back(item["embedding"].get<std::vector<double>>());
    if (vectors.size() != request.texts.size())
        throw ProviderError("embedding response size mismatch");
    return vectors;
}

// --- Gateway ----------------------------------------------------------------

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Provider> provider)
    : config_(std::move(config)), provider_(std::move(provider)) {
    if ((config_.mode == GatewayMode::Record || config_.mode == GatewayMode::Replay) &&
        !config_.cassette_path)
        throw std::invalid_argument("record/replay mode needs a cassette path");
    if (config_.mode == GatewayMode::Replay) {
        load_cassette();
    } else if (config_.mode == GatewayMode::Record) {
        cassette_out_ = std::make_unique<std::ofstream>(*config_.cassette_path, std::ios::trunc);
        if (!*cassette_out_)
            throw std::runtime_error("cannot open cassette for writing: " + *config_.cassette_path);
    }
}

Gateway::~Gateway() = default;

void Gateway::load_cassette() {
    std::ifstream in(*config_.cassette_path);
    if (!in) throw CassetteMiss("(cassette file missing: " + *config_.cassette_path + ")");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("cassette line " + std::to_string(line_no) +
                                     " is not valid JSON: " + e.what());
        }
        std::string fp = entry.value("fingerprint", std::string());
        if (fp.empty())
            throw std::runtime_error("cassette line " + std::to_string(line_no) +
                                     " has no fingerprint");
        if (cache_.count(fp))
            throw std::runtime_error("cassette has duplicate fingerprint " + fp);
        cache_[fp] = entry.at("response").dump();
    }
}

void Gateway::acquire_slot() {
    std::unique_lock<std::mutex> lock(mutex_);
    slot_available_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
}

void Gateway::release_slot() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        --in_flight_;
    }
    slot_available_.notify_one();
}

template <typename Request, typename Fetch>
std::string Gateway::run_with_retry(const Request& request, Fetch fetch) {
    (void)request;
    if (!provider_) throw ProviderError("no provider configured on this gateway");
    int delay_ms = config_.retry.initial_delay_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            acquire_slot();
            std::string result;
            try {
                result = fetch();
            } catch (...) {
                release_slot();
                throw;
            }
            release_slot();
            return result;
        } catch (const ProviderError& e) {
            if (!e.transient || attempt >= config_.retry.max_attempts) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms = static_cast<int>(delay_ms * config_.retry.multiplier);
        }
    }
}

std::string Gateway::resolve(const std::string& fp, const std::string& kind,
                             const std::function<std::string()>& fetch) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++requests_served_;
        auto it = cache_.find(fp);
        if (it != cache_.end()) return it->second;
        if (config_.mode == GatewayMode::Replay) throw CassetteMiss(fp);
    }

    std::string payload = fetch();

    std::lock_guard<std::mutex> lock(mutex_);
    // another thread may have resolved the same fingerprint meanwhile
    auto it = cache_.find(fp);
    if (it != cache_.end()) return it->second;
    cache_[fp] = payload;
    if (config_.mode == GatewayMode::Record && !recorded_.count(fp)) {
        recorded_.insert(fp);
        json entry;
        entry["fingerprint"] = fp;
        entry["kind"] = kind;
        entry["response"] = json::parse(payload);
        entry["timestamp"] = iso_timestamp();
        *cassette_out_ << entry.dump() << '\n';
        cassette_out_->flush();
    }
    return payload;
}

std::string Gateway::chat(const ChatRequest& request) {
    check(request);
    std::string fp = fingerprint(request);
    std::string payload = resolve(fp, "chat", [&] {
        return run_with_retry(request, [&] { return json(provider_->chat(request)).dump(); });
    });
    return json::parse(payload).get<std::string>();
}

std::vector<std::vector<double>> Gateway::embed(const EmbeddingRequest& request) {
    check(request);
    std::string fp = fingerprint(request);
    std::string payload = resolve(fp, "embed", [&] {
        return run_with_retry(request, [&] {
            auto vectors = provider_->embed(request);
            if (!vectors.empty()) {
                std::size_t dim = vectors.front().size();
                for (const auto& v : vectors)
                    if (v.size() != dim)
                        throw ProviderError("embedding dimension mismatch within batch");
            }
            return json(vectors).dump();
        });
    });
    return json::parse(payload).get<std::vector<std::vector<double>>>();
}

std::size_t Gateway::request_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_served_;
}

// --- ScriptedProvider -------------------------------------------------------

std::string ScriptedProvider::chat(const ChatRequest&) {
    ++chat_calls;
    if (transient_failures_ > 0) {
        --transient_failures_;
        throw ProviderError("scripted transient failure", true);
    }
    if (chat_next_ >= chat_responses_.size())
        throw ProviderError("scripted provider ran out of chat responses");
    return chat_responses_[chat_next_++];
}

std::vector<std::vector<double>> ScriptedProvider::embed(const EmbeddingRequest& request) {
    ++embed_calls;
    if (embed_next_ >= embed_responses_.size())
        throw ProviderError("scripted provider ran out of embedding responses");
    auto vectors = embed_responses_[embed_next_++];
    if (vectors.size() != request.texts.size())
        throw ProviderError("scripted embedding batch size mismatch");
    return vectors;
}

std::vector<double> hashed_embedding(const std::string& text, std::size_t dimension) {
    std::vector<double> vec(dimension, 0.0);
    std::size_t i = 0;
    bool any = false;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (!std::isalnum(c)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::uint64_t h = 0xcbf29ce484222325ULL;
        while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) {
            h ^= static_cast<unsigned char>(std::tolower(text[j]));
            h *= 0x100000001b3ULL;
            ++j;
        }
        vec[h % dimension] += 1.0;
        any = true;
        i = j;
    }
    if (!any) vec[0] = 1.0;  // keep the vector nonzero for empty text
    return vec;
}

}  // namespace protoeval::llm
