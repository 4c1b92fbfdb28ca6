#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cw/vectormath.hpp"

namespace cw {

struct ClusteringResult {
    int k = 0;
    std::vector<int> labels;      // per sample, in [0, k); no empty clusters
    std::vector<Vec> centroids;   // k unit vectors
    double mean_silhouette = 0.0;
    std::uint64_t seed = 0;
    int iterations = 0;
    bool converged = false;
};

struct SilhouetteResult {
    std::vector<double> per_sample;  // s(i) in [-1, 1]; 0 for singleton clusters
    std::vector<double> a_values;    // mean intra-cluster distance (0 for singletons)
    std::vector<double> b_values;    // min mean distance to another cluster
    double mean = 0.0;
};

struct LloydOptions {
    int max_iter = 300;
    double tol = 1e-6;  // max centroid displacement (euclidean)
};

// Lloyd's iteration under cosine distance on unit vectors: assign to the
// nearest centroid, recompute centroids as renormalized member means, repair
// empty clusters by moving in the point farthest from its own centroid.
// Deterministic given (vectors, k, seed); k-means++-style seeding.
// Throws ValidationError for k < 2, k > N, or all-identical input.
ClusteringResult lloyd_cosine(const std::vector<Vec>& vectors, int k, std::uint64_t seed,
                              const LloydOptions& opts = {});

// Cosine-distance silhouette with the standard a(i)/b(i) definitions;
// samples alone in their cluster score exactly 0.
// Throws ValidationError unless >= 2 clusters are present.
SilhouetteResult silhouette(const std::vector<Vec>& vectors, const std::vector<int>& labels);

struct SweepOptions {
    int k_min = 3;
    int k_max = 12;
    int restarts = 8;
    std::uint64_t seed = 0;
    int top = 5;
    LloydOptions lloyd;
    int threads = 1;  // restarts run concurrently when > 1; merge order is fixed
};

struct SweepOutcome {
    // Best run per k, then the `top` across all k by mean silhouette
    // descending; ties broken by smaller k, then smaller seed.
    std::vector<ClusteringResult> runs;
    std::vector<std::string> warnings;
};

// The k sweep: for each k in [k_min, k_max] run `restarts` seeded Lloyd
// passes (seeds seed+0 .. seed+restarts-1), keep each k's best, return the
// top results overall. k_max is truncated to N-1 with a warning when the
// sample is too small.
SweepOutcome sweep_k(const std::vector<Vec>& vectors, const SweepOptions& opts = {});

}  // namespace cw
