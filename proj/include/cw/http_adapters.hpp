#pragma once

#include <string>

#include "cw/brainwrite.hpp"
#include "cw/embedding.hpp"
#include "cw/sentiment.hpp"

namespace cw {

// Provider endpoint + credentials, normally resolved from the environment:
//   CW_PROVIDER_BASE_URL / CW_PROVIDER_API_KEY, with per-adapter overrides
//   CW_PROVIDER_BASE_URL_CHAT / _EMBEDDING / _LOGIT (same for API_KEY).
struct ProviderEndpoint {
    std::string base_url;  // e.g. "http://localhost:8080/v1"
    std::string api_key;   // sent as a bearer token when non-empty
    int timeout_seconds = 60;
};

// Reads the endpoint for one adapter role ("CHAT", "EMBEDDING", "LOGIT").
// Throws ValidationError when no base URL is configured.
ProviderEndpoint endpoint_from_env(const std::string& role);

// POST {base}/chat/completions with a single user message; returns
// choices[0].message.content.
class HttpChatBackend final : public TextBackend {
public:
    HttpChatBackend(ProviderEndpoint endpoint, std::string model);
    std::string id() const override { return model_; }
    std::string generate(const std::string& prompt, const GenerationParams& params) override;

private:
    ProviderEndpoint endpoint_;
    std::string model_;
};

// POST {base}/embeddings with {model, input: [texts]}; returns
// data[i].embedding in input order.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(ProviderEndpoint endpoint, std::string model, std::size_t dim);
    std::string provider_id() const override { return "http"; }
    std::string model_id() const override { return model_; }
    std::size_t dimension() const override { return dim_; }
    std::vector<Vec> embed(const std::vector<std::string>& texts) override;

private:
    ProviderEndpoint endpoint_;
    std::string model_;
    std::size_t dim_;
};

// POST {base}/next_token with {model, prompt}; expects the fixture-shaped
// response {tokens[10], probs[10], token_vectors[10][D], anchor_pos[D],
// anchor_neg[D]} from a self-hosted logit server.
class HttpLogitProvider final : public LogitProvider {
public:
    HttpLogitProvider(ProviderEndpoint endpoint, std::string model,
                      PromptKind kind = PromptKind::general);
    std::string model_id() const override { return model_; }
    PromptKind prompt_kind() const override { return kind_; }
    NextTokenDistribution probe(const Interview& interview, const std::string& prompt) override;

private:
    ProviderEndpoint endpoint_;
    std::string model_;
    PromptKind kind_;
};

}  // namespace cw
