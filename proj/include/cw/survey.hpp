#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace cw {

// Ten SUS items on the 1..5 agreement scale, in questionnaire order.
struct SusResponse {
    std::array<int, 10> items{};
};

// Six load dimensions on 0..100: mental, physical, temporal, effort,
// performance, frustration.
struct TlxResponse {
    std::array<int, 6> dims{};
};

// Standard SUS scoring: odd items contribute (item - 1), even items (5 -
// item), total scaled by 2.5 onto [0, 100].
double sus_score(const SusResponse& r);

// Raw-TLX: unweighted mean of the six dimensions. `invert_performance`
// flips the performance dimension (100 - value) for datasets where higher
// meant better.
double tlx_raw(const TlxResponse& r, bool invert_performance = false);

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

SummaryStats summarize(const std::vector<double>& values);
std::string summary_to_json(const SummaryStats& s, const std::string& instrument);
std::string summary_to_csv(const SummaryStats& s, const std::string& instrument);

// CSV loaders, one response per row. Headers are validated:
//   SUS: q1,...,q10    TLX: mental,physical,temporal,effort,performance,frustration
std::vector<SusResponse> load_sus_csv(std::istream& in);
std::vector<TlxResponse> load_tlx_csv(std::istream& in);

}  // namespace cw
