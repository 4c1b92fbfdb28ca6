#include "cw/http_adapters.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "cw/errors.hpp"

namespace cw {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

// splits "http://host:8080/v1" into ("http://host:8080", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ValidationError("provider base URL must include a scheme: " + url);
    }
    const auto path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path);
    if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path), prefix};
}

json post_json(const ProviderEndpoint& endpoint, const std::string& path, const json& body) {
    const auto [host, prefix] = split_base_url(endpoint.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(endpoint.timeout_seconds);
    client.set_read_timeout(endpoint.timeout_seconds);
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + endpoint.api_key);
    }
    auto res = client.Post(prefix + path, headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError("transport failure calling " + endpoint.base_url + path + ": " +
                            httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw ProviderError("provider returned HTTP " + std::to_string(res->status) + " for " +
                            path + ": " + res->body.substr(0, 200));
    }
    try {
        return json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw ProviderError(std::string("provider returned invalid JSON: ") + e.what());
    }
}

}  // namespace

ProviderEndpoint endpoint_from_env(const std::string& role) {
    ProviderEndpoint ep;
    ep.base_url = env_or(("CW_PROVIDER_BASE_URL_" + role).c_str(),
                         env_or("CW_PROVIDER_BASE_URL", ""));
    ep.api_key =
        env_or(("CW_PROVIDER_API_KEY_" + role).c_str(), env_or("CW_PROVIDER_API_KEY", ""));
    if (ep.base_url.empty()) {
        throw ValidationError("no provider base URL: set CW_PROVIDER_BASE_URL or "
                              "CW_PROVIDER_BASE_URL_" +
                              role);
    }
    return ep;
}

HttpChatBackend::HttpChatBackend(ProviderEndpoint endpoint, std::string model)
    : endpoint_(std::move(endpoint)), model_(std::move(model)) {}

std::string HttpChatBackend::generate(const std::string& prompt, const GenerationParams& params) {
    json body = {
        {"model", model_},
        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", params.temperature},
        {"top_p", params.top_p},
        {"max_tokens", params.max_tokens},
        {"seed", params.seed},
    };
    const json res = post_json(endpoint_, "/chat/completions", body);
    try {
        return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected chat completion shape: ") + e.what());
    }
}

HttpEmbeddingProvider::HttpEmbeddingProvider(ProviderEndpoint endpoint, std::string model,
                                             std::size_t dim)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), dim_(dim) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
}

std::vector<Vec> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    json body = {{"model", model_}, {"input", texts}};
    const json res = post_json(endpoint_, "/embeddings", body);
    std::vector<Vec> out;
    try {
        const auto& data = res.at("data");
        out.reserve(data.size());
        for (const auto& item : data) out.push_back(item.at("embedding").get<Vec>());
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected embeddings shape: ") + e.what());
    }
    return out;
}

HttpLogitProvider::HttpLogitProvider(ProviderEndpoint endpoint, std::string model, PromptKind kind)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), kind_(kind) {}

NextTokenDistribution HttpLogitProvider::probe(const Interview& interview,
                                               const std::string& prompt) {
    json body = {{"model", model_}, {"interview_id", interview.id}, {"prompt", prompt}};
    const json res = post_json(endpoint_, "/next_token", body);
    NextTokenDistribution dist;
    try {
        dist.tokens = res.at("tokens").get<std::vector<std::string>>();
        dist.probs = res.at("probs").get<std::vector<double>>();
        dist.token_vectors = res.at("token_vectors").get<std::vector<Vec>>();
        dist.anchor_pos = res.at("anchor_pos").get<Vec>();
        dist.anchor_neg = res.at("anchor_neg").get<Vec>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected next_token shape: ") + e.what());
    }
    dist.source_model = model_;
    return dist;
}

}  // namespace cw
