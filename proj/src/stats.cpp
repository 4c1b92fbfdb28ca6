#include "cw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cw/errors.hpp"

namespace cw {

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw ValidationError("mean of empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

void require_two_each(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw ValidationError("insufficient samples: need n >= 2 per side, got " +
                              std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
}

double variance(const std::vector<double>& xs) {
    const double sd = sample_sd(xs);
    return sd * sd;
}

}  // namespace

TestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    require_two_each(a, b);
    TestResult res;
    res.n_a = a.size();
    res.n_b = b.size();

    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = variance(a);
    const double vb = variance(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    const double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        res.statistic = 0.0;
        res.p_value = ma == mb ? 1.0 : 0.0;
        if (ma != mb) res.statistic = std::numeric_limits<double>::infinity();
        return res;
    }

    res.statistic = (ma - mb) / std::sqrt(se2);
    const double df =
        se2 * se2 / (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
    boost::math::students_t dist(df);
    res.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(res.statistic)));
    res.p_value = std::min(1.0, res.p_value);
    return res;
}

TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    require_two_each(a, b);
    TestResult res;
    res.n_a = a.size();
    res.n_b = b.size();

    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const std::size_t n = na + nb;

    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> all;
    all.reserve(n);
    for (double x : a) all.push_back({x, true});
    for (double x : b) all.push_back({x, false});
    std::sort(all.begin(), all.end(),
              [](const Tagged& l, const Tagged& r) { return l.value < r.value; });

    // average ranks over ties; accumulate the tie correction term sum(t^3 - t)
    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && all[j + 1].value == all[i].value) ++j;
        const double t = static_cast<double>(j - i + 1);
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t m = i; m <= j; ++m) {
            if (all[m].from_a) rank_sum_a += avg_rank;
        }
        if (t > 1.0) tie_term += t * t * t - t;
        i = j + 1;
    }

    const double u_a = rank_sum_a - static_cast<double>(na) * (na + 1.0) / 2.0;
    res.statistic = u_a;

    const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
    const double nn = static_cast<double>(n);
    const double sigma2 = (static_cast<double>(na) * static_cast<double>(nb) / 12.0) *
                          ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (sigma2 <= 0.0) {
        res.p_value = 1.0;  // everything tied
        return res;
    }

    double z = u_a - mu;
    z += (z > 0.0) ? -0.5 : (z < 0.0 ? 0.5 : 0.0);  // continuity correction
    z /= std::sqrt(sigma2);
    boost::math::normal gauss;
    res.p_value = 2.0 * boost::math::cdf(boost::math::complement(gauss, std::fabs(z)));
    res.p_value = std::min(1.0, res.p_value);
    return res;
}

}  // namespace cw
