#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cw/errors.hpp"
#include "cw/http_adapters.hpp"

using namespace cw;
using nlohmann::json;

namespace {

// loopback provider double for the three adapter shapes
struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::string last_auth;

    LocalServer() {
        server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                                httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            const json body = json::parse(req.body);
            const std::string prompt = body.at("messages").at(0).at("content");
            json out = {{"choices",
                         json::array({{{"message",
                                        {{"role", "assistant"},
                                         {"content", "echo: " + prompt.substr(0, 10)}}}}})}};
            res.set_content(out.dump(), "application/json");
        });
        server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            json data = json::array();
            for (std::size_t i = 0; i < body.at("input").size(); ++i) {
                data.push_back({{"embedding", {1.0, static_cast<double>(i), 0.5}}});
            }
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        server.Post("/v1/next_token", [&](const httplib::Request&, httplib::Response& res) {
            json out;
            out["tokens"] = json::array();
            out["probs"] = json::array();
            out["token_vectors"] = json::array();
            for (int i = 0; i < 10; ++i) {
                out["tokens"].push_back("tok" + std::to_string(i));
                out["probs"].push_back(i == 0 ? 0.91 : 0.01);
                out["token_vectors"].push_back({1.0, 0.0, 0.1 * i});
            }
            out["anchor_pos"] = {1.0, 0.0, 0.0};
            out["anchor_neg"] = {0.0, 1.0, 0.0};
            res.set_content(out.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this]() { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread.join();
    }
    ProviderEndpoint endpoint() const {
        return ProviderEndpoint{"http://127.0.0.1:" + std::to_string(port) + "/v1", "sekrit", 5};
    }
};

}  // namespace

TEST_CASE("http adapters against a loopback server") {
    LocalServer server;
    if (server.port <= 0) return;  // sandbox without loopback listen; skip

    SUBCASE("chat backend round-trip with bearer auth") {
        HttpChatBackend backend(server.endpoint(), "flash");
        const std::string out = backend.generate("hello world prompt", GenerationParams{});
        CHECK(out == "echo: hello worl");
        CHECK(server.last_auth == "Bearer sekrit");
    }
    SUBCASE("embedding provider parses data array") {
        HttpEmbeddingProvider provider(server.endpoint(), "embedder", 3);
        const auto vecs = provider.embed({"a", "b"});
        REQUIRE(vecs.size() == 2);
        CHECK(vecs[1] == Vec{1.0, 1.0, 0.5});
    }
    SUBCASE("logit provider parses the next-token shape") {
        HttpLogitProvider provider(server.endpoint(), "senti-model");
        const auto dist = provider.probe({"i1", "text"}, "prompt");
        CHECK(dist.tokens.size() == 10);
        CHECK(dist.source_model == "senti-model");
        CHECK(dist.anchor_pos == Vec{1.0, 0.0, 0.0});
    }
    SUBCASE("non-2xx responses become provider errors") {
        ProviderEndpoint ep = server.endpoint();
        ep.base_url = "http://127.0.0.1:" + std::to_string(server.port) + "/nowhere";
        HttpChatBackend backend(ep, "flash");
        CHECK_THROWS_AS(backend.generate("x", GenerationParams{}), ProviderError);
    }
}

TEST_CASE("transport failure maps to ProviderError") {
    ProviderEndpoint unreachable{"http://127.0.0.1:9/v1", "", 1};
    HttpChatBackend backend(unreachable, "flash");
    CHECK_THROWS_AS(backend.generate("x", GenerationParams{}), ProviderError);
}

TEST_CASE("endpoint resolution from the environment") {
    ::setenv("CW_PROVIDER_BASE_URL", "http://base:1/v1", 1);
    ::setenv("CW_PROVIDER_BASE_URL_CHAT", "http://chat:2/v1", 1);
    ::setenv("CW_PROVIDER_API_KEY", "base-key", 1);
    CHECK(endpoint_from_env("CHAT").base_url == "http://chat:2/v1");
    CHECK(endpoint_from_env("CHAT").api_key == "base-key");
    CHECK(endpoint_from_env("EMBEDDING").base_url == "http://base:1/v1");
    ::unsetenv("CW_PROVIDER_BASE_URL");
    ::unsetenv("CW_PROVIDER_BASE_URL_CHAT");
    ::unsetenv("CW_PROVIDER_API_KEY");
    CHECK_THROWS_AS(endpoint_from_env("CHAT"), ValidationError);
}
