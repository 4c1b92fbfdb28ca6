#include "cw/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "cw/errors.hpp"

namespace cw {

using nlohmann::json;

std::string to_string(const DiversityCellKey& key) {
    std::string out = to_string(key.group);
    out += '/';
    out += to_string(key.cls);
    if (!key.model.empty()) {
        out += '/';
        out += key.model;
    }
    if (key.participants >= 0) {
        out += "/p";
        out += std::to_string(key.participants);
    }
    return out;
}

DiversityCellKey diversity_cell_from_string(const std::string& s) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, '/')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 4) {
        throw ValidationError("cell key must be group/class[/model[/pC]], got \"" + s + "\"");
    }
    DiversityCellKey key;
    key.group = group_from_string(parts[0]);
    key.cls = idea_class_from_string(parts[1]);
    if (parts.size() >= 3) key.model = parts[2];
    if (parts.size() == 4) {
        if (parts[3].size() < 2 || parts[3][0] != 'p') {
            throw ValidationError("participants segment must look like \"p3\", got \"" +
                                  parts[3] + "\"");
        }
        key.participants = std::stoi(parts[3].substr(1));
    }
    return key;
}

const char* to_string(Granularity g) {
    switch (g) {
        case Granularity::by_class: return "class";
        case Granularity::by_class_model: return "class-model";
        case Granularity::by_class_model_participants: return "class-model-participants";
    }
    return "?";
}

Granularity granularity_from_string(const std::string& s) {
    if (s == "class") return Granularity::by_class;
    if (s == "class-model") return Granularity::by_class_model;
    if (s == "class-model-participants") return Granularity::by_class_model_participants;
    throw ValidationError("unknown granularity \"" + s + "\"");
}

LabelDistribution occupancy_distribution(const std::vector<int>& labels,
                                         const std::vector<std::string>& cell_member_ids,
                                         const std::vector<std::string>& sample_ids) {
    if (cell_member_ids.empty()) throw ValidationError("occupancy of an empty cell");
    if (labels.size() != sample_ids.size()) {
        throw ValidationError("labels/sample_ids length mismatch");
    }
    std::unordered_map<std::string, std::size_t> pos;
    pos.reserve(sample_ids.size());
    for (std::size_t i = 0; i < sample_ids.size(); ++i) pos.emplace(sample_ids[i], i);

    int k = 0;
    for (int c : labels) k = std::max(k, c + 1);

    std::vector<std::size_t> counts(k, 0);
    for (const auto& id : cell_member_ids) {
        auto it = pos.find(id);
        if (it == pos.end()) {
            throw ValidationError("cell member \"" + id + "\" is not part of the clustering");
        }
        ++counts[labels[it->second]];
    }

    LabelDistribution dist;
    dist.n = cell_member_ids.size();
    dist.probabilities.resize(k);
    for (int c = 0; c < k; ++c) {
        dist.probabilities[c] =
            static_cast<double>(counts[c]) / static_cast<double>(dist.n);
        if (counts[c] > 0) dist.support.push_back(c);
    }
    return dist;
}

EntropyValue shannon_entropy(const LabelDistribution& dist, double base) {
    if (base <= 1.0) throw ValidationError("entropy base must be > 1");
    double sum = 0.0;
    for (double p : dist.probabilities) {
        if (p < 0.0) throw ValidationError("negative probability in distribution");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ValidationError("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
    double h = 0.0;
    for (double p : dist.probabilities) {
        if (p <= 0.0) continue;
        h -= base == 2.0 ? p * std::log2(p) : p * std::log(p) / std::log(base);
    }
    return EntropyValue{std::max(0.0, h), base};
}

Improvement relative_improvement(double h_treatment, double h_baseline) {
    if (h_baseline < 0.0) throw ValidationError("baseline entropy cannot be negative");
    if (h_baseline == 0.0) {
        return Improvement{std::numeric_limits<double>::infinity(), true};
    }
    return Improvement{100.0 * (h_treatment - h_baseline) / h_baseline, false};
}

namespace {

DiversityCellKey project(const IdeaRecord& r, Granularity g) {
    DiversityCellKey key;
    key.group = r.condition.group;
    key.cls = r.condition.cls;
    if (g != Granularity::by_class) key.model = r.condition.model;
    if (g == Granularity::by_class_model_participants) key.participants = r.condition.participants;
    return key;
}

void check_runs(const GroupClusterings& gc, Group group) {
    for (const auto& run : gc.runs) {
        if (run.labels.size() != gc.sample_ids.size()) {
            throw ValidationError(std::string("clustering labels misaligned with sample_ids in ") +
                                  to_string(group));
        }
        for (int c : run.labels) {
            if (c < 0 || c >= run.k) {
                throw ValidationError(std::string("cluster label out of range in ") +
                                      to_string(group));
            }
        }
    }
}

}  // namespace

DiversityReport diversity_report(const CorpusIndex& index,
                                 const std::map<Group, GroupClusterings>& clusterings,
                                 const DiversityOptions& opts) {
    if (opts.base <= 1.0) throw ValidationError("entropy base must be > 1");

    DiversityReport report;
    report.base = opts.base;
    report.granularity = opts.granularity;
    report.per_topic = opts.per_topic;

    for (const auto& [group, gc] : clusterings) {
        if (gc.runs.empty()) continue;
        check_runs(gc, group);

        GroupDiversity gd;
        for (const auto& run : gc.runs) {
            gd.clusterings.push_back({run.k, run.seed, run.mean_silhouette});
        }

        // project the group's (group, class, model) cells onto the reporting
        // granularity, preserving cell iteration order
        std::map<DiversityCellKey, std::vector<std::string>> members;
        std::map<std::pair<DiversityCellKey, std::string>, std::vector<std::string>> topic_members;
        for (const auto& [cell, ids] : index.cells) {
            if (cell.group != group) continue;
            for (const auto& id : ids) {
                const IdeaRecord& r = index.records.at(id);
                const DiversityCellKey key = project(r, opts.granularity);
                members[key].push_back(id);
                if (opts.per_topic) topic_members[{key, r.topic_id}].push_back(id);
            }
        }

        auto entropies = [&](const std::vector<std::string>& ids) {
            std::vector<double> values;
            values.reserve(gc.runs.size());
            for (const auto& run : gc.runs) {
                const auto dist = occupancy_distribution(run.labels, ids, gc.sample_ids);
                values.push_back(shannon_entropy(dist, opts.base).value);
            }
            return values;
        };

        for (const auto& [key, ids] : members) {
            CellEntropy ce;
            ce.cell = key;
            ce.n = ids.size();
            ce.values = entropies(ids);
            ce.mean = mean_of(ce.values);
            ce.sd = sample_sd(ce.values);
            ce.low_confidence = ce.n < 2;
            gd.cells.push_back(std::move(ce));
        }
        for (const auto& [key_topic, ids] : topic_members) {
            TopicEntropy te;
            te.cell = key_topic.first;
            te.topic_id = key_topic.second;
            te.n = ids.size();
            te.values = entropies(ids);
            te.mean = mean_of(te.values);
            gd.topics.push_back(std::move(te));
        }

        report.groups.emplace(group, std::move(gd));
    }
    return report;
}

ComparisonResult compare_conditions(const DiversityReport& report, const DiversityCellKey& cell_a,
                                    const DiversityCellKey& cell_b, ComparisonTest test) {
    if (!report.per_topic) {
        throw ValidationError("comparison requires a report built in per-topic mode");
    }
    auto collect = [&](const DiversityCellKey& key) {
        std::vector<double> samples;
        for (const auto& [group, gd] : report.groups) {
            for (const auto& te : gd.topics) {
                if (te.cell == key) samples.push_back(te.mean);
            }
        }
        return samples;
    };
    const auto a = collect(cell_a);
    const auto b = collect(cell_b);
    if (a.size() < 2 || b.size() < 2) {
        throw ValidationError("insufficient samples: cell " + to_string(cell_a) + " has " +
                              std::to_string(a.size()) + " topics, cell " + to_string(cell_b) +
                              " has " + std::to_string(b.size()));
    }
    const TestResult r = test == ComparisonTest::welch ? welch_t_test(a, b) : mann_whitney_u(a, b);
    return ComparisonResult{test, r.statistic, r.p_value, r.n_a, r.n_b};
}

namespace {

json cell_key_to_json(const DiversityCellKey& key) {
    json obj = {{"group", to_string(key.group)}, {"class", to_string(key.cls)}};
    if (!key.model.empty()) obj["model"] = key.model;
    if (key.participants >= 0) obj["participants"] = key.participants;
    return obj;
}

DiversityCellKey cell_key_from_json(const json& obj) {
    DiversityCellKey key;
    key.group = group_from_string(obj.at("group").get<std::string>());
    key.cls = idea_class_from_string(obj.at("class").get<std::string>());
    if (obj.contains("model")) key.model = obj.at("model").get<std::string>();
    if (obj.contains("participants")) key.participants = obj.at("participants").get<int>();
    return key;
}

}  // namespace

std::string report_to_json(const DiversityReport& report) {
    json groups = json::object();
    for (const auto& [group, gd] : report.groups) {
        json metas = json::array();
        for (const auto& m : gd.clusterings) {
            metas.push_back({{"k", m.k}, {"seed", m.seed}, {"mean_silhouette", m.mean_silhouette}});
        }
        json cells = json::array();
        for (const auto& ce : gd.cells) {
            json obj = cell_key_to_json(ce.cell);
            obj["n"] = ce.n;
            obj["values"] = ce.values;
            obj["entropy_mean"] = ce.mean;
            obj["entropy_sd"] = ce.sd;
            obj["low_confidence"] = ce.low_confidence;
            cells.push_back(std::move(obj));
        }
        json topics = json::array();
        for (const auto& te : gd.topics) {
            json obj = cell_key_to_json(te.cell);
            obj["topic_id"] = te.topic_id;
            obj["n"] = te.n;
            obj["values"] = te.values;
            obj["mean"] = te.mean;
            topics.push_back(std::move(obj));
        }
        json entry = {{"clusterings", metas}, {"cells", cells}};
        if (report.per_topic) entry["topics"] = topics;
        groups[to_string(group)] = std::move(entry);
    }
    json doc = {{"base", report.base},
                {"granularity", to_string(report.granularity)},
                {"per_topic", report.per_topic},
                {"groups", groups}};
    return doc.dump(2);
}

DiversityReport report_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed diversity report: ") + e.what());
    }
    DiversityReport report;
    try {
        report.base = doc.at("base").get<double>();
        report.granularity = granularity_from_string(doc.at("granularity").get<std::string>());
        report.per_topic = doc.at("per_topic").get<bool>();
        for (const auto& [name, entry] : doc.at("groups").items()) {
            GroupDiversity gd;
            for (const auto& m : entry.at("clusterings")) {
                gd.clusterings.push_back({m.at("k").get<int>(), m.at("seed").get<std::uint64_t>(),
                                          m.at("mean_silhouette").get<double>()});
            }
            for (const auto& c : entry.at("cells")) {
                CellEntropy ce;
                ce.cell = cell_key_from_json(c);
                ce.n = c.at("n").get<std::size_t>();
                ce.values = c.at("values").get<std::vector<double>>();
                ce.mean = c.at("entropy_mean").get<double>();
                ce.sd = c.at("entropy_sd").get<double>();
                ce.low_confidence = c.at("low_confidence").get<bool>();
                gd.cells.push_back(std::move(ce));
            }
            if (entry.contains("topics")) {
                for (const auto& t : entry.at("topics")) {
                    TopicEntropy te;
                    te.cell = cell_key_from_json(t);
                    te.topic_id = t.at("topic_id").get<std::string>();
                    te.n = t.at("n").get<std::size_t>();
                    te.values = t.at("values").get<std::vector<double>>();
                    te.mean = t.at("mean").get<double>();
                    gd.topics.push_back(std::move(te));
                }
            }
            report.groups.emplace(group_from_string(name), std::move(gd));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad diversity report: ") + e.what());
    }
    return report;
}

namespace {

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

struct Row {
    std::string group, cls, model, participants, k, silhouette, mean, sd;
};

std::vector<Row> table_rows(const DiversityReport& report) {
    std::vector<Row> rows;
    for (const auto& [group, gd] : report.groups) {
        for (const auto& ce : gd.cells) {
            for (const auto& meta : gd.clusterings) {
                Row row;
                row.group = to_string(group);
                row.cls = to_string(ce.cell.cls);
                row.model = ce.cell.model.empty() ? "*" : ce.cell.model;
                row.participants =
                    ce.cell.participants < 0 ? "*" : std::to_string(ce.cell.participants);
                row.k = std::to_string(meta.k);
                row.silhouette = fixed6(meta.mean_silhouette);
                row.mean = fixed6(ce.mean);
                row.sd = fixed6(ce.sd);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace

std::string render_csv(const DiversityReport& report) {
    std::ostringstream out;
    out << "group,class,model,participants,k,silhouette,entropy_mean,entropy_sd\n";
    for (const auto& r : table_rows(report)) {
        out << r.group << ',' << r.cls << ',' << r.model << ',' << r.participants << ',' << r.k
            << ',' << r.silhouette << ',' << r.mean << ',' << r.sd << '\n';
    }
    return out.str();
}

std::string render_markdown(const DiversityReport& report) {
    std::ostringstream out;
    out << "| group | class | model | participants | k | silhouette | entropy_mean | entropy_sd |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : table_rows(report)) {
        out << "| " << r.group << " | " << r.cls << " | " << r.model << " | " << r.participants
            << " | " << r.k << " | " << r.silhouette << " | " << r.mean << " | " << r.sd
            << " |\n";
    }
    return out.str();
}

}  // namespace cw
