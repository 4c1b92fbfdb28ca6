#include <doctest.h>

#include <cmath>
#include <random>

#include "cw/errors.hpp"
#include "cw/vectormath.hpp"

using namespace cw;

namespace {

// independent naive route: no shared code with cw::cosine_similarity
double naive_cosine(const Vec& a, const Vec& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

Vec random_vec(std::mt19937_64& rng, std::size_t dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(dim);
    bool nonzero = false;
    do {
        for (auto& x : v) x = u(rng);
        nonzero = norm(v) > 1e-6;
    } while (!nonzero);
    return v;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
    Vec e1 = {1, 0, 0, 0};
    CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0).epsilon(1e-15));

    Vec a = {1, 0};
    Vec b = {0, 1};
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.0).epsilon(1e-15));

    Vec c = {1, 1};
    const double expected = std::sqrt(2.0) / 2.0;  // closed form for 45 degrees
    CHECK(cosine_similarity(c, a) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cosine_similarity(c, a) == doctest::Approx(naive_cosine(c, a)).epsilon(1e-14));
}

TEST_CASE("cosine distance basics") {
    Vec a = {0.3, -0.4, 0.5};
    CHECK(cosine_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));

    Vec b = {1, 2, -1};
    Vec nb = {-1, -2, 1};
    CHECK(cosine_distance(b, nb) == doctest::Approx(2.0).epsilon(1e-12));

    Vec c = {1, 1};
    Vec d = {1, 0};
    CHECK(cosine_distance(c, d) ==
          doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("cosine errors") {
    Vec a = {1, 0};
    Vec b = {1, 0, 0};
    CHECK_THROWS_AS(cosine_similarity(a, b), ValidationError);
    Vec zero = {0, 0};
    CHECK_THROWS_AS(cosine_similarity(a, zero), ValidationError);
    CHECK_THROWS_AS(cosine_distance(zero, a), ValidationError);
}

TEST_CASE("unit_normalize") {
    Vec v = {3, 4};
    const Vec n = unit_normalize(v);
    CHECK(n[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-12));

    const Vec again = unit_normalize(n);  // idempotent on unit vectors
    CHECK(again[0] == doctest::Approx(n[0]).epsilon(1e-15));

    Vec zero = {0, 0, 0};
    CHECK_THROWS_AS(unit_normalize(zero), ValidationError);
}

TEST_CASE("cosine properties over random vectors") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> scale(0.1, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec a = random_vec(rng, 6);
        const Vec b = random_vec(rng, 6);

        // symmetry
        CHECK(cosine_similarity(a, b) ==
              doctest::Approx(cosine_similarity(b, a)).epsilon(1e-13));

        // scale invariance for alpha > 0
        const double alpha = scale(rng);
        Vec scaled = a;
        for (auto& x : scaled) x *= alpha;
        CHECK(cosine_similarity(scaled, b) ==
              doctest::Approx(cosine_similarity(a, b)).epsilon(1e-12));

        // distance stays within [0, 2]
        const double d = cosine_distance(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= 2.0);

        // agreement with the naive loop
        CHECK(cosine_similarity(a, b) == doctest::Approx(naive_cosine(a, b)).epsilon(1e-13));
    }
}
