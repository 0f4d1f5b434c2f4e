#include <doctest.h>

#include <atomic>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "protoeval/gateway.hpp"
#include "temp.hpp"

using namespace protoeval;
using nlohmann::json;

namespace {

// local OpenAI-shaped endpoint used to exercise the live provider path
class LocalServer {
public:
    LocalServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& request,
                                                    httplib::Response& response) {
            ++chat_hits;
            auto body = json::parse(request.body);
            last_model = body.value("model", "");
            last_auth = request.get_header_value("Authorization");
            if (fail_with_status) {
                response.status = fail_with_status;
                return;
            }
            json reply = {
                {"choices",
                 {{{"message",
                    {{"role", "assistant"},
                     {"content", "echo: " + body["messages"].back()["content"].get<std::string>()}}}}}}};
            response.set_content(reply.dump(), "application/json");
        });
        server_.Post("/v1/embeddings", [](const httplib::Request& request,
                                          httplib::Response& response) {
            auto body = json::parse(request.body);
            json data = json::array();
            int i = 0;
            for (const auto& text : body["input"]) {
                double value = static_cast<double>(text.get<std::string>().size());
                data.push_back({{"index", i++}, {"embedding", {value, 1.0}}});
            }
            response.set_content(json{{"data", data}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~LocalServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    std::atomic<int> chat_hits{0};
    int fail_with_status = 0;
    std::string last_model;
    std::string last_auth;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

llm::ChatRequest simple_chat(const std::string& content) {
    llm::ChatRequest request;
    request.model_id = "test-model";
    request.messages.push_back({"user", content});
    return request;
}

}  // namespace

TEST_CASE("http provider speaks the chat and embedding endpoints") {
    LocalServer server;
    llm::HttpProvider provider(server.base_url(), "secret-key");

    CHECK(provider.chat(simple_chat("ping")) == "echo: ping");
    CHECK(server.last_model == "test-model");
    CHECK(server.last_auth == "Bearer secret-key");

    auto vectors = provider.embed({"embed-model", {"ab", "abcd"}});
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[0] == std::vector<double>{2.0, 1.0});
    CHECK(vectors[1] == std::vector<double>{4.0, 1.0});
}

TEST_CASE("server errors map to transient or permanent provider errors") {
    LocalServer server;
    llm::HttpProvider provider(server.base_url(), "k");

    server.fail_with_status = 503;
    try {
        provider.chat(simple_chat("q"));
        FAIL("expected ProviderError");
    } catch (const llm::ProviderError& e) {
        CHECK(e.transient);
    }

    server.fail_with_status = 404;
    try {
        provider.chat(simple_chat("q"));
        FAIL("expected ProviderError");
    } catch (const llm::ProviderError& e) {
        CHECK_FALSE(e.transient);
    }
}

TEST_CASE("gateway record/replay works over the live http path") {
    testutil::TempDir dir;
    LocalServer server;
    std::string cassette = (dir.path() / "http.jsonl").string();

    {
        llm::GatewayConfig config;
        config.mode = llm::GatewayMode::Record;
        config.cassette_path = cassette;
        llm::Gateway gateway(config,
                             std::make_shared<llm::HttpProvider>(server.base_url(), "k"));
        CHECK(gateway.chat(simple_chat("live question")) == "echo: live question");
    }
    CHECK(server.chat_hits == 1);

    llm::GatewayConfig config;
    config.mode = llm::GatewayMode::Replay;
    config.cassette_path = cassette;
    llm::Gateway gateway(config, nullptr);
    CHECK(gateway.chat(simple_chat("live question")) == "echo: live question");
    CHECK(server.chat_hits == 1);  // replay never touched the network
}
