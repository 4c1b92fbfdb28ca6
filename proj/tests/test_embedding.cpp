#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cw/embedding.hpp"
#include "cw/errors.hpp"

using namespace cw;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    const fs::path p = fs::temp_directory_path() / (std::string("cw_embed_test_") + name);
    fs::remove(p);
    return p;
}

std::vector<IdeaRecord> two_records() {
    IdeaRecord a;
    a.id = "a";
    a.topic_id = "t";
    a.condition = {Group::G1, IdeaClass::bk, "flash", 1, Strategy::zero_shot};
    a.text = "first idea";
    IdeaRecord b = a;
    b.id = "b";
    b.text = "second idea";
    return {a, b};
}

// fails a configurable number of times before succeeding
class FlakyProvider final : public EmbeddingProvider {
public:
    FlakyProvider(int failures, std::size_t dim) : failures_(failures), inner_(dim, "flaky") {}
    std::string provider_id() const override { return "mock"; }
    std::string model_id() const override { return "flaky"; }
    std::size_t dimension() const override { return inner_.dimension(); }
    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        ++attempts_;
        if (failures_ > 0) {
            --failures_;
            throw ProviderError("synthetic transport failure");
        }
        return inner_.embed(texts);
    }
    int attempts() const { return attempts_; }

private:
    int failures_;
    MockEmbeddingProvider inner_;
    int attempts_ = 0;
};

EmbedOptions fast_opts() {
    EmbedOptions opts;
    opts.backoff = std::chrono::milliseconds(1);
    return opts;
}

}  // namespace

TEST_CASE("mock provider is deterministic and unit-norm") {
    MockEmbeddingProvider p(16);
    const auto v1 = p.embed({"same text"});
    const auto v2 = p.embed({"same text"});
    CHECK(v1 == v2);
    CHECK(norm(v1[0]) == doctest::Approx(1.0).epsilon(1e-12));

    const auto other = p.embed({"different text"});
    CHECK(v1[0] != other[0]);

    MockEmbeddingProvider q(16, "other-model");
    CHECK(q.embed({"same text"})[0] != v1[0]);  // model id feeds the seed
}

TEST_CASE("embed_corpus cold cache then full hit") {
    const fs::path path = temp_file("cold.jsonl");
    MockEmbeddingProvider provider(8);
    EmbedOptions opts = fast_opts();
    opts.batch_size = 1;  // one provider call per record

    {
        EmbeddingCache cache(path);
        const auto set = embed_corpus(two_records(), provider, cache, opts);
        CHECK(provider.calls() == 2);
        CHECK(set.vectors.size() == 2);
        CHECK(set.dim == 8);
        CHECK(cache.size() == 2);
    }
    {
        // fresh cache object against the same file: no provider calls
        EmbeddingCache cache(path);
        CHECK(cache.size() == 2);
        const int before = provider.calls();
        const auto set = embed_corpus(two_records(), provider, cache, opts);
        CHECK(provider.calls() == before);
        CHECK(set.vectors.size() == 2);
    }
    fs::remove(path);
}

TEST_CASE("embed_corpus is deterministic with the mock provider") {
    const fs::path p1 = temp_file("det1.jsonl");
    const fs::path p2 = temp_file("det2.jsonl");
    MockEmbeddingProvider provider(12);
    EmbeddingCache c1(p1), c2(p2);
    const auto s1 = embed_corpus(two_records(), provider, c1, fast_opts());
    const auto s2 = embed_corpus(two_records(), provider, c2, fast_opts());
    CHECK(s1.vectors.at("a") == s2.vectors.at("a"));
    CHECK(s1.vectors.at("b") == s2.vectors.at("b"));
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("dimension drift between cache and provider") {
    const fs::path path = temp_file("drift.jsonl");
    {
        MockEmbeddingProvider provider(8);
        EmbeddingCache cache(path);
        embed_corpus(two_records(), provider, cache, fast_opts());
    }
    {
        MockEmbeddingProvider wider(16);
        EmbeddingCache cache(path);
        CHECK_THROWS_WITH_AS(embed_corpus(two_records(), wider, cache, fast_opts()),
                             doctest::Contains("dimension drift"), ValidationError);
    }
    fs::remove(path);
}

TEST_CASE("cache rejects mixed providers and malformed lines") {
    const fs::path path = temp_file("mixed.jsonl");
    {
        std::ofstream out(path);
        out << R"({"id":"a","dim":2,"provider_id":"mock","model_id":"m1","vector":[1.0,0.0]})"
            << "\n";
        out << R"({"id":"b","dim":2,"provider_id":"mock","model_id":"m2","vector":[0.0,1.0]})"
            << "\n";
    }
    CHECK_THROWS_AS(EmbeddingCache{path}, ParseError);

    {
        std::ofstream out(path, std::ios::trunc);
        out << "{broken\n";
    }
    CHECK_THROWS_AS(EmbeddingCache{path}, ParseError);
    fs::remove(path);
}

TEST_CASE("a truncated final cache line is dropped and re-embedded") {
    const fs::path path = temp_file("truncated.jsonl");
    MockEmbeddingProvider provider(8);
    {
        EmbeddingCache cache(path);
        embed_corpus(two_records(), provider, cache, fast_opts());
    }
    {
        // chop the tail: simulates an interrupted append
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        in.close();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content.substr(0, content.size() - 20);
    }
    EmbeddingCache cache(path);
    CHECK(cache.size() == 1);  // the complete line survives
    const auto set = embed_corpus(two_records(), provider, cache, fast_opts());
    CHECK(set.vectors.size() == 2);
    fs::remove(path);
}

TEST_CASE("provider retry with bounded backoff") {
    SUBCASE("recovers within the attempt budget") {
        const fs::path path = temp_file("retry_ok.jsonl");
        FlakyProvider provider(2, 8);
        EmbeddingCache cache(path);
        const auto set = embed_corpus(two_records(), provider, cache, fast_opts());
        CHECK(set.vectors.size() == 2);
        CHECK(provider.attempts() == 3);
        fs::remove(path);
    }
    SUBCASE("surfaces after exhausting attempts") {
        const fs::path path = temp_file("retry_fail.jsonl");
        FlakyProvider provider(100, 8);
        EmbeddingCache cache(path);
        CHECK_THROWS_AS(embed_corpus(two_records(), provider, cache, fast_opts()), ProviderError);
        CHECK(provider.attempts() == 3);  // default max_attempts
        fs::remove(path);
    }
}

TEST_CASE("restrict_to preserves order and validates coverage") {
    EmbeddingSet set;
    set.dim = 2;
    set.vectors = {{"x", {1.0, 0.0}}, {"y", {0.0, 1.0}}};
    const auto [ids, vecs] = restrict_to(set, {"y", "x"});
    CHECK(ids == std::vector<std::string>{"y", "x"});
    CHECK(vecs[0] == Vec{0.0, 1.0});
    CHECK_THROWS_AS(restrict_to(set, {"z"}), ValidationError);
}
