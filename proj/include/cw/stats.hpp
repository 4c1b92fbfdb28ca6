#pragma once

#include <cstddef>
#include <vector>

namespace cw {

struct TestResult {
    double statistic = 0.0;  // t for Welch, U (of sample a) for Mann-Whitney
    double p_value = 1.0;    // two-sided
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

double mean_of(const std::vector<double>& xs);
// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
double sample_sd(const std::vector<double>& xs);

// Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.
// Zero-variance edge cases: equal means -> t=0, p=1; unequal -> p=0.
// Requires n >= 2 per sample.
TestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided Mann-Whitney U via the tie-corrected normal approximation with
// continuity correction. Requires n >= 2 per sample.
TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace cw
