#pragma once

#include <condition_variable>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// Provider-agnostic chat/embedding access with response caching and a
// JSONL cassette for deterministic record/replay of every model
// interaction.

namespace protoeval::llm {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<int> seed;
    std::optional<int> max_tokens;
};

struct EmbeddingRequest {
    std::string model_id;
    std::vector<std::string> texts;
};

struct ProviderError : std::runtime_error {
    bool transient = false;
    explicit ProviderError(const std::string& what, bool transient_failure = false)
        : std::runtime_error(what), transient(transient_failure) {}
};

struct CassetteMiss : std::runtime_error {
    std::string fingerprint;
    explicit CassetteMiss(std::string fp)
        : std::runtime_error("cassette has no entry for fingerprint " + fp),
          fingerprint(std::move(fp)) {}
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string chat(const ChatRequest& request) = 0;
    virtual std::vector<std::vector<double>> embed(const EmbeddingRequest& request) = 0;
};

// OpenAI-style JSON endpoints under a configurable base URL. Reads
// PROTOEVAL_API_BASE / PROTOEVAL_API_KEY when values are not supplied.
class HttpProvider : public Provider {
public:
    HttpProvider(std::string base_url = "", std::string api_key = "");
    std::string chat(const ChatRequest& request) override;
    std::vector<std::vector<double>> embed(const EmbeddingRequest& request) override;

private:
    std::string post_json(const std::string& path, const std::string& body);
    std::string base_url_;
    std::string api_key_;
};

enum class GatewayMode { Record, Replay, Passthrough };

std::string_view to_string(GatewayMode mode);
std::optional<GatewayMode> gateway_mode_from(std::string_view name);

struct RetryPolicy {
    int max_attempts = 5;
    int initial_delay_ms = 250;
    double multiplier = 2.0;
};

struct GatewayConfig {
    GatewayMode mode = GatewayMode::Passthrough;
    std::optional<std::string> cassette_path;  // required for Record/Replay
    RetryPolicy retry;
    int max_in_flight = 4;
};

// Stable content hash (SHA-256 hex of the canonicalized request); any
// semantic field change yields a new fingerprint.
std::string fingerprint(const ChatRequest& request);
std::string fingerprint(const EmbeddingRequest& request);

class Gateway {
public:
    Gateway(GatewayConfig config, std::shared_ptr<Provider> provider = nullptr);
    ~Gateway();

    // Returns the assistant text. Identical requests are served from the
    // in-memory cache; in Replay mode the provider is never touched.
    std::string chat(const ChatRequest& request);

    // One vector per input text; uniform dimension per batch.
    std::vector<std::vector<double>> embed(const EmbeddingRequest& request);

    GatewayMode mode() const { return config_.mode; }
    std::size_t request_count() const;

private:
    // payload is the JSON-encoded response (string for chat, array of
    // arrays for embeddings)
    std::string resolve(const std::string& fp, const std::string& kind,
                        const std::function<std::string()>& fetch);
    template <typename Request, typename Fetch>
    std::string run_with_retry(const Request& request, Fetch fetch);
    void append_entry(const std::string& fp, const std::string& kind,
                      const std::string& payload_json);
    void load_cassette();
    void acquire_slot();
    void release_slot();

    GatewayConfig config_;
    std::shared_ptr<Provider> provider_;
    mutable std::mutex mutex_;
    std::condition_variable slot_available_;
    std::unordered_map<std::string, std::string> cache_;  // fingerprint -> payload JSON
    std::unordered_set<std::string> recorded_;
    std::size_t requests_served_ = 0;
    int in_flight_ = 0;
    std::unique_ptr<std::ofstream> cassette_out_;
};

// Test double that replays a scripted list of responses in order.
class ScriptedProvider : public Provider {
public:
    void push_chat(std::string response) { chat_responses_.push_back(std::move(response)); }
    void push_embed(std::vector<std::vector<double>> vectors) {
        embed_responses_.push_back(std::move(vectors));
    }
    void fail_next_chats(int count) { transient_failures_ = count; }

    std::string chat(const ChatRequest& request) override;
    std::vector<std::vector<double>> embed(const EmbeddingRequest& request) override;

    std::size_t chat_calls = 0;
    std::size_t embed_calls = 0;

private:
    std::vector<std::string> chat_responses_;
    std::vector<std::vector<std::vector<double>>> embed_responses_;
    std::size_t chat_next_ = 0;
    std::size_t embed_next_ = 0;
    int transient_failures_ = 0;
};

// Deterministic local embedder: hashed bag of lowercase tokens. Used for
// offline index building and embedding scores without a provider.
std::vector<double> hashed_embedding(const std::string& text, std::size_t dimension = 256);

}  // namespace protoeval::llm
