#include "cw/vectormath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cw/errors.hpp"

namespace cw {

namespace {

void require_same_dim(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw ValidationError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double cosine_similarity(const Vec& a, const Vec& b) {
    require_same_dim(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw ValidationError("zero-norm input to cosine_similarity");
    const double s = dot(a, b) / (na * nb);
    return std::clamp(s, -1.0, 1.0);
}

double cosine_distance(const Vec& a, const Vec& b) { return 1.0 - cosine_similarity(a, b); }

Vec unit_normalize(const Vec& v) {
    const double n = norm(v);
    if (n == 0.0) throw ValidationError("cannot normalize a zero-norm vector");
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

}  // namespace cw
