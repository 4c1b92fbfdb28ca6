#include "cw/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "cw/errors.hpp"

namespace cw {

namespace {

void check_inputs(const std::vector<Vec>& vectors, int k) {
    const int n = static_cast<int>(vectors.size());
    if (k < 2) throw ValidationError("k must be >= 2, got " + std::to_string(k));
    if (k > n) {
        throw ValidationError("k=" + std::to_string(k) + " exceeds sample count N=" +
                              std::to_string(n));
    }
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) {
            throw ValidationError("clustering input mixes vector dimensions");
        }
    }
    bool all_identical = true;
    for (std::size_t i = 1; i < vectors.size() && all_identical; ++i) {
        all_identical = vectors[i] == vectors[0];
    }
    if (all_identical && k >= 2) {
        throw ValidationError("all input vectors are identical; no k>=2 clustering exists");
    }
}

// k-means++ seeding under cosine distance, hand-rolled weighted draw so the
// sequence depends only on (vectors, k, seed).
std::vector<Vec> seed_centroids(const std::vector<Vec>& vectors, int k, std::mt19937_64& rng) {
    const std::size_t n = vectors.size();
    std::vector<Vec> centroids;
    centroids.reserve(k);
    std::vector<bool> chosen(n, false);

    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t idx = first(rng);
    centroids.push_back(vectors[idx]);
    chosen[idx] = true;

    std::vector<double> d2(n, 0.0);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) {
                d2[i] = 0.0;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, cosine_distance(vectors[i], c));
            d2[i] = best * best;
            total += d2[i];
        }
        std::size_t next = n;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                r -= d2[i];
                if (r <= 0.0) {
                    next = i;
                    break;
                }
            }
        }
        if (next == n) {
            // all remaining candidates coincide with picked centroids
            std::vector<std::size_t> open;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) open.push_back(i);
            }
            std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
            next = open[pick(rng)];
        }
        centroids.push_back(vectors[next]);
        chosen[next] = true;
    }
    return centroids;
}

int nearest_centroid(const Vec& v, const std::vector<Vec>& centroids) {
    int best = 0;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = dot(v, centroids[c]);
        if (d > best_dot) {
            best_dot = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace

ClusteringResult lloyd_cosine(const std::vector<Vec>& vectors, int k, std::uint64_t seed,
                              const LloydOptions& opts) {
    check_inputs(vectors, k);
    const std::size_t n = vectors.size();
    const std::size_t dim = vectors.front().size();

    std::mt19937_64 rng(seed);
    std::vector<Vec> centroids = seed_centroids(vectors, k, rng);
    std::vector<int> labels(n, -1);

    int iterations = 0;
    bool converged = false;
    while (iterations < opts.max_iter) {
        ++iterations;

        // assignment
        int changes = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = nearest_centroid(vectors[i], centroids);
            if (c != labels[i]) {
                labels[i] = c;
                ++changes;
            }
        }

        // empty-cluster repair: hand the empty cluster the point farthest
        // from its current centroid (clusters of one are left intact)
        std::vector<int> counts(k, 0);
        for (int c : labels) ++counts[c];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double worst = -1.0;
            std::size_t worst_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[labels[i]] < 2) continue;
                const double d = cosine_distance(vectors[i], centroids[labels[i]]);
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            --counts[labels[worst_i]];
            labels[worst_i] = c;
            ++counts[c];
            ++changes;
        }

        if (changes == 0) {
            converged = true;
            break;
        }

        // centroid update: renormalized member mean; a degenerate (near-zero)
        // mean keeps the previous centroid
        double shift = 0.0;
        std::vector<Vec> sums(k, Vec(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) sums[labels[i]][d] += vectors[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (norm(sums[c]) < 1e-12) continue;
            Vec updated = unit_normalize(sums[c]);
            double disp = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double delta = updated[d] - centroids[c][d];
                disp += delta * delta;
            }
            shift = std::max(shift, std::sqrt(disp));
            centroids[c] = std::move(updated);
        }
        if (shift < opts.tol) {
            converged = true;
            break;
        }
    }

    ClusteringResult result;
    result.k = k;
    result.labels = std::move(labels);
    result.centroids = std::move(centroids);
    result.seed = seed;
    result.iterations = iterations;
    result.converged = converged;
    result.mean_silhouette = silhouette(vectors, result.labels).mean;
    return result;
}

SilhouetteResult silhouette(const std::vector<Vec>& vectors, const std::vector<int>& labels) {
    const std::size_t n = vectors.size();
    if (labels.size() != n) throw ValidationError("labels/vectors length mismatch");
    if (n == 0) throw ValidationError("silhouette needs at least one sample");

    int k = 0;
    for (int c : labels) {
        if (c < 0) throw ValidationError("negative cluster label");
        k = std::max(k, c + 1);
    }
    std::vector<int> counts(k, 0);
    for (int c : labels) ++counts[c];
    const int present = static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                                       [](int x) { return x > 0; }));
    if (present < 2) throw ValidationError("silhouette undefined for a single-cluster labeling");

    const std::size_t dim = vectors.front().size();

    // Mean cosine distance from i to cluster c is 1 - <v_i, sum_c>/|c| for
    // unit vectors; own-cluster means subtract the self term exactly.
    std::vector<Vec> sums(k, Vec(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) sums[labels[i]][d] += vectors[i][d];
    }

    SilhouetteResult res;
    res.per_sample.resize(n);
    res.a_values.resize(n);
    res.b_values.resize(n);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int own = labels[i];
        const double self_dot = dot(vectors[i], vectors[i]);

        double a = 0.0;
        if (counts[own] > 1) {
            const double sum_dot = dot(vectors[i], sums[own]);
            a = 1.0 - (sum_dot - self_dot) / (counts[own] - 1);
        }

        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[c] == 0) continue;
            const double mean_dist = 1.0 - dot(vectors[i], sums[c]) / counts[c];
            b = std::min(b, mean_dist);
        }

        double s = 0.0;
        if (counts[own] > 1) {
            const double denom = std::max(a, b);
            s = denom > 0.0 ? (b - a) / denom : 0.0;
        }
        res.a_values[i] = a;
        res.b_values[i] = b;
        res.per_sample[i] = s;
        total += s;
    }
    res.mean = total / static_cast<double>(n);
    return res;
}

SweepOutcome sweep_k(const std::vector<Vec>& vectors, const SweepOptions& opts) {
    const int n = static_cast<int>(vectors.size());
    if (opts.k_min < 2) throw ValidationError("k_min must be >= 2");
    if (opts.k_max < opts.k_min) throw ValidationError("k_max must be >= k_min");
    if (opts.restarts < 1) throw ValidationError("restarts must be >= 1");
    if (opts.top < 1) throw ValidationError("top must be >= 1");
    if (n < opts.k_min) {
        throw ValidationError("corpus too small: N=" + std::to_string(n) + " < k_min=" +
                              std::to_string(opts.k_min));
    }

    SweepOutcome outcome;
    int k_max = opts.k_max;
    if (k_max > n) {
        k_max = n - 1;
        outcome.warnings.push_back("k_max " + std::to_string(opts.k_max) +
                                   " exceeds N=" + std::to_string(n) + "; truncated to " +
                                   std::to_string(k_max));
    }
    if (k_max < opts.k_min) {
        throw ValidationError("corpus too small: truncated k_max " + std::to_string(k_max) +
                              " < k_min " + std::to_string(opts.k_min));
    }

    auto run_one = [&](int k, int restart) {
        return lloyd_cosine(vectors, k, opts.seed + static_cast<std::uint64_t>(restart),
                            opts.lloyd);
    };

    std::vector<ClusteringResult> best_per_k;
    for (int k = opts.k_min; k <= k_max; ++k) {
        std::vector<ClusteringResult> restarts(opts.restarts);
        if (opts.threads > 1) {
            for (int base = 0; base < opts.restarts; base += opts.threads) {
                const int end = std::min(opts.restarts, base + opts.threads);
                std::vector<std::future<ClusteringResult>> futs;
                for (int r = base; r < end; ++r) {
                    futs.push_back(std::async(std::launch::async, run_one, k, r));
                }
                for (int r = base; r < end; ++r) restarts[r] = futs[r - base].get();
            }
        } else {
            for (int r = 0; r < opts.restarts; ++r) restarts[r] = run_one(k, r);
        }
        // merge in restart order: higher silhouette wins, earlier seed on ties
        ClusteringResult best = std::move(restarts.front());
        for (int r = 1; r < opts.restarts; ++r) {
            if (restarts[r].mean_silhouette > best.mean_silhouette) {
                best = std::move(restarts[r]);
            }
        }
        best_per_k.push_back(std::move(best));
    }

    std::stable_sort(best_per_k.begin(), best_per_k.end(),
                     [](const ClusteringResult& a, const ClusteringResult& b) {
                         if (a.mean_silhouette != b.mean_silhouette) {
                             return a.mean_silhouette > b.mean_silhouette;
                         }
                         if (a.k != b.k) return a.k < b.k;
                         return a.seed < b.seed;
                     });
    if (static_cast<int>(best_per_k.size()) > opts.top) best_per_k.resize(opts.top);
    outcome.runs = std::move(best_per_k);
    return outcome;
}

}  // namespace cw
