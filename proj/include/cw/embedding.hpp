#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cw/corpus.hpp"
#include "cw/vectormath.hpp"

namespace cw {

// Unit vectors per record id, all of one dimension from one provider+model.
struct EmbeddingSet {
    std::size_t dim = 0;
    std::string provider_id;
    std::string model_id;
    std::map<std::string, Vec> vectors;

    bool contains(const std::string& id) const { return vectors.count(id) != 0; }
    const Vec& at(const std::string& id) const;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string provider_id() const = 0;
    virtual std::string model_id() const = 0;
    virtual std::size_t dimension() const = 0;
    // One vector per input text, each of dimension(). Throws ProviderError on
    // transport failure.
    virtual std::vector<Vec> embed(const std::vector<std::string>& texts) = 0;
};

// Offline stand-in: reproducible pseudo-random unit vector seeded by a stable
// hash of (text, model_id). Same text + model always embeds identically.
class MockEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(std::size_t dim = 64, std::string model = "mock-embed");

    std::string provider_id() const override { return "mock"; }
    std::string model_id() const override { return model_; }
    std::size_t dimension() const override { return dim_; }
    std::vector<Vec> embed(const std::vector<std::string>& texts) override;

    int calls() const { return calls_; }

private:
    std::size_t dim_;
    std::string model_;
    int calls_ = 0;
};

// Append-only JSON-Lines store: {"id", "dim", "provider_id", "model_id",
// "vector"}. A cache file is homogeneous in (provider, model, dim); vectors
// are stored unit-normalized. Writes go through a single append path and
// always emit whole lines.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }
    std::size_t size() const { return vectors_.size(); }
    bool empty() const { return vectors_.empty(); }
    std::size_t dim() const { return dim_; }  // 0 until first entry
    const std::string& provider_id() const { return provider_id_; }
    const std::string& model_id() const { return model_id_; }

    bool contains(const std::string& id) const { return vectors_.count(id) != 0; }
    const Vec* find(const std::string& id) const;

    // Appends one batch as a contiguous block of lines, then flushes.
    void append(const std::vector<std::pair<std::string, Vec>>& batch,
                const std::string& provider_id, const std::string& model_id);

private:
    std::filesystem::path path_;
    std::map<std::string, Vec> vectors_;
    std::size_t dim_ = 0;
    std::string provider_id_;
    std::string model_id_;
};

struct EmbedOptions {
    std::size_t batch_size = 64;
    int max_attempts = 3;                     // provider calls per batch
    std::chrono::milliseconds backoff{100};   // doubled per retry
};

// Embeds every record's text, going to the provider only for cache misses.
// Throws ValidationError on cache/provider dimension drift, ProviderError
// once retries are exhausted.
EmbeddingSet embed_corpus(const std::vector<IdeaRecord>& records, EmbeddingProvider& provider,
                          EmbeddingCache& cache, const EmbedOptions& opts = {});

// The subset of `set` covering `ids`, as parallel arrays in the given order.
// Throws ValidationError when an id has no vector.
std::pair<std::vector<std::string>, std::vector<Vec>> restrict_to(
    const EmbeddingSet& set, const std::vector<std::string>& ids);

}  // namespace cw
