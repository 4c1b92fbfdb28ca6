#include "cw/embedding.hpp"

#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cw/errors.hpp"
#include "cw/hashing.hpp"

namespace cw {

using nlohmann::json;

const Vec& EmbeddingSet::at(const std::string& id) const {
    auto it = vectors.find(id);
    if (it == vectors.end()) throw ValidationError("no embedding for record id \"" + id + "\"");
    return it->second;
}

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dim, std::string model)
    : dim_(dim), model_(std::move(model)) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
}

std::vector<Vec> MockEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    ++calls_;
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::mt19937_64 rng(mix64(fnv1a64(text) ^ fnv1a64(model_)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec v(dim_);
        for (auto& x : v) x = gauss(rng);
        out.push_back(unit_normalize(v));
    }
    return out;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // absent cache = empty cache
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // a final line without its newline is an interrupted append: ignore it,
    // the entry will be re-embedded and re-appended
    const bool complete = content.empty() || content.back() == '\n';
    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!complete && stream.eof()) break;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, "", std::string("malformed cache line: ") + e.what());
        }
        try {
            const auto id = obj.at("id").get<std::string>();
            const auto dim = obj.at("dim").get<std::size_t>();
            Vec v = obj.at("vector").get<Vec>();
            const auto provider = obj.at("provider_id").get<std::string>();
            const auto model = obj.at("model_id").get<std::string>();
            if (v.size() != dim) {
                throw ParseError(line_no, "vector", "vector length disagrees with dim");
            }
            if (!all_finite(v)) throw ParseError(line_no, "vector", "non-finite entry");
            if (dim_ == 0) {
                dim_ = dim;
                provider_id_ = provider;
                model_id_ = model;
            } else if (dim != dim_) {
                throw ParseError(line_no, "dim", "cache mixes dimensions " +
                                                     std::to_string(dim_) + " and " +
                                                     std::to_string(dim));
            } else if (provider != provider_id_ || model != model_id_) {
                throw ParseError(line_no, "model_id",
                                 "cache mixes providers/models; use one cache file per model");
            }
            vectors_[id] = unit_normalize(v);
        } catch (const json::exception& e) {
            throw ParseError(line_no, "", std::string("bad cache entry: ") + e.what());
        }
    }
}

const Vec* EmbeddingCache::find(const std::string& id) const {
    auto it = vectors_.find(id);
    return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingCache::append(const std::vector<std::pair<std::string, Vec>>& batch,
                            const std::string& provider_id, const std::string& model_id) {
    if (batch.empty()) return;
    std::string block;
    for (const auto& [id, v] : batch) {
        if (dim_ == 0) {
            dim_ = v.size();
            provider_id_ = provider_id;
            model_id_ = model_id;
        } else if (v.size() != dim_) {
            throw ValidationError("dimension drift: cache holds " + std::to_string(dim_) +
                                  ", appending " + std::to_string(v.size()));
        }
        json obj = {{"id", id},
                    {"dim", v.size()},
                    {"provider_id", provider_id},
                    {"model_id", model_id},
                    {"vector", v}};
        block += obj.dump();
        block += '\n';
    }
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ValidationError("cannot open cache for append: " + path_.string());
    out << block;
    out.flush();
    if (!out) throw ValidationError("cache write failed: " + path_.string());
    for (const auto& [id, v] : batch) vectors_[id] = v;
}

namespace {

std::vector<Vec> embed_with_retry(EmbeddingProvider& provider,
                                  const std::vector<std::string>& texts,
                                  const EmbedOptions& opts) {
    for (int attempt = 1;; ++attempt) {
        try {
            return provider.embed(texts);
        } catch (const ProviderError&) {
            if (attempt >= opts.max_attempts) throw;
            std::this_thread::sleep_for(opts.backoff * (1 << (attempt - 1)));
        }
    }
}

}  // namespace

EmbeddingSet embed_corpus(const std::vector<IdeaRecord>& records, EmbeddingProvider& provider,
                          EmbeddingCache& cache, const EmbedOptions& opts) {
    if (!cache.empty()) {
        if (cache.dim() != provider.dimension()) {
            throw ValidationError("dimension drift: cache built at D=" +
                                  std::to_string(cache.dim()) + ", provider returns D=" +
                                  std::to_string(provider.dimension()));
        }
        if (cache.provider_id() != provider.provider_id() ||
            cache.model_id() != provider.model_id()) {
            throw ValidationError("cache belongs to " + cache.provider_id() + "/" +
                                  cache.model_id() + ", provider is " + provider.provider_id() +
                                  "/" + provider.model_id());
        }
    }

    std::vector<const IdeaRecord*> missing;
    for (const auto& r : records) {
        if (!cache.contains(r.id)) missing.push_back(&r);
    }

    for (std::size_t start = 0; start < missing.size(); start += opts.batch_size) {
        const std::size_t end = std::min(missing.size(), start + opts.batch_size);
        std::vector<std::string> texts;
        texts.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) texts.push_back(missing[i]->text);

        std::vector<Vec> vecs = embed_with_retry(provider, texts, opts);
        if (vecs.size() != texts.size()) {
            throw ProviderError("provider returned " + std::to_string(vecs.size()) +
                                " vectors for " + std::to_string(texts.size()) + " texts");
        }
        std::vector<std::pair<std::string, Vec>> batch;
        batch.reserve(vecs.size());
        for (std::size_t i = 0; i < vecs.size(); ++i) {
            Vec& v = vecs[i];
            if (v.size() != provider.dimension()) {
                throw ValidationError("provider vector has dimension " + std::to_string(v.size()) +
                                      ", expected " + std::to_string(provider.dimension()));
            }
            if (!all_finite(v)) {
                throw ValidationError("provider returned non-finite embedding for record \"" +
                                      missing[start + i]->id + "\"");
            }
            batch.emplace_back(missing[start + i]->id, unit_normalize(v));
        }
        cache.append(batch, provider.provider_id(), provider.model_id());
    }

    EmbeddingSet set;
    set.dim = provider.dimension();
    set.provider_id = provider.provider_id();
    set.model_id = provider.model_id();
    for (const auto& r : records) {
        const Vec* v = cache.find(r.id);
        if (!v) throw ValidationError("record \"" + r.id + "\" missing from cache after embed");
        set.vectors.emplace(r.id, *v);
    }
    return set;
}

std::pair<std::vector<std::string>, std::vector<Vec>> restrict_to(
    const EmbeddingSet& set, const std::vector<std::string>& ids) {
    std::vector<Vec> vecs;
    vecs.reserve(ids.size());
    for (const auto& id : ids) vecs.push_back(set.at(id));
    return {ids, vecs};
}

}  // namespace cw
