#pragma once

#include <vector>

namespace cw {

// Embedding vector payload. Fixed dimension within a corpus (3584 for the
// production embedding model; small for mocks and tests).
using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& v);
bool all_finite(const Vec& v);

// (a.b)/(|a||b|), clamped to [-1, 1] against floating-point overshoot.
// Throws ValidationError on dimension mismatch or zero-norm input.
double cosine_similarity(const Vec& a, const Vec& b);

// 1 - cosine_similarity(a, b); range [0, 2].
double cosine_distance(const Vec& a, const Vec& b);

// v / |v|. Throws ValidationError on zero norm.
Vec unit_normalize(const Vec& v);

}  // namespace cw
