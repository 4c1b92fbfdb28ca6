#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cw/clustering.hpp"
#include "cw/corpus.hpp"
#include "cw/stats.hpp"

namespace cw {

// Empirical cluster-occupancy distribution of one condition cell.
struct LabelDistribution {
    std::vector<double> probabilities;  // indexed by cluster id, sums to 1
    std::vector<int> support;           // cluster ids with nonzero mass
    std::size_t n = 0;                  // members counted
};

struct EntropyValue {
    double value = 0.0;
    double base = 2.0;
};

// Cell address at reporting granularity. Empty model / participants = -1
// mean "pooled over that axis".
struct DiversityCellKey {
    Group group = Group::G1;
    IdeaClass cls = IdeaClass::bk;
    std::string model;
    int participants = -1;

    auto operator<=>(const DiversityCellKey&) const = default;
};

std::string to_string(const DiversityCellKey& key);

// Accepts "G1/bk", "G1/bk/flash", or "G1/bk/flash/p2".
DiversityCellKey diversity_cell_from_string(const std::string& s);

enum class Granularity { by_class, by_class_model, by_class_model_participants };

const char* to_string(Granularity g);
Granularity granularity_from_string(const std::string& s);

struct CellEntropy {
    DiversityCellKey cell;
    std::size_t n = 0;
    std::vector<double> values;  // one per retained clustering
    double mean = 0.0;
    double sd = 0.0;
    bool low_confidence = false;  // n < 2
};

struct TopicEntropy {
    DiversityCellKey cell;
    std::string topic_id;
    std::size_t n = 0;
    std::vector<double> values;
    double mean = 0.0;
};

struct ClusteringMeta {
    int k = 0;
    std::uint64_t seed = 0;
    double mean_silhouette = 0.0;
};

struct GroupDiversity {
    std::vector<ClusteringMeta> clusterings;
    std::vector<CellEntropy> cells;
    std::vector<TopicEntropy> topics;  // filled in per-topic mode
};

struct DiversityReport {
    double base = 2.0;
    Granularity granularity = Granularity::by_class_model;
    bool per_topic = false;
    std::map<Group, GroupDiversity> groups;
};

// The retained clusterings of one group, fitted on the pooled group vectors.
struct GroupClusterings {
    std::vector<std::string> sample_ids;  // aligns with every run's labels
    std::vector<ClusteringResult> runs;
};

struct DiversityOptions {
    double base = 2.0;
    Granularity granularity = Granularity::by_class_model;
    bool per_topic = false;
};

// Frequency of each cluster label among the cell's members, normalized.
// Throws ValidationError on an empty cell or an id absent from sample_ids.
LabelDistribution occupancy_distribution(const std::vector<int>& labels,
                                         const std::vector<std::string>& cell_member_ids,
                                         const std::vector<std::string>& sample_ids);

// H = -sum p log_b p with 0 log 0 = 0. Base 2 uses log2 directly so dyadic
// distributions come out exact. Throws on base <= 1 or probabilities that do
// not form a distribution.
EntropyValue shannon_entropy(const LabelDistribution& dist, double base = 2.0);

struct Improvement {
    double percent = 0.0;
    bool infinite = false;  // baseline was zero
};

// 100 * (treatment - baseline) / baseline; zero baseline yields the flagged
// infinite marker instead of a number. Negative baselines are rejected.
Improvement relative_improvement(double h_treatment, double h_baseline);

// Per-cell occupancy entropy under every retained clustering of the cell's
// group, with mean and sd across clusterings. Cells with fewer than two
// members are reported but flagged low-confidence.
DiversityReport diversity_report(const CorpusIndex& index,
                                 const std::map<Group, GroupClusterings>& clusterings,
                                 const DiversityOptions& opts = {});

enum class ComparisonTest { welch, mann_whitney };

struct ComparisonResult {
    ComparisonTest test = ComparisonTest::welch;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

// Compares two cells' per-topic entropy samples (mean over clusterings per
// topic). The report must have been built in per-topic mode and both cells
// need >= 2 topics.
ComparisonResult compare_conditions(const DiversityReport& report, const DiversityCellKey& cell_a,
                                    const DiversityCellKey& cell_b,
                                    ComparisonTest test = ComparisonTest::welch);

std::string report_to_json(const DiversityReport& report);
DiversityReport report_from_json(const std::string& text);

// Tabular renderings; one row per (cell, retained clustering) with columns
// group, class, model, participants, k, silhouette, entropy_mean, entropy_sd.
std::string render_csv(const DiversityReport& report);
std::string render_markdown(const DiversityReport& report);

}  // namespace cw
