#include "cw/survey.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "cw/errors.hpp"
#include "cw/stats.hpp"

namespace cw {

using nlohmann::json;

double sus_score(const SusResponse& r) {
    int total = 0;
    for (std::size_t i = 0; i < r.items.size(); ++i) {
        const int item = r.items[i];
        if (item < 1 || item > 5) {
            throw ValidationError("SUS item " + std::to_string(i + 1) + " out of range 1..5: " +
                                  std::to_string(item));
        }
        // items are 1-based in the instrument: index 0 is item 1 (odd)
        total += (i % 2 == 0) ? item - 1 : 5 - item;
    }
    return total * 2.5;
}

double tlx_raw(const TlxResponse& r, bool invert_performance) {
    double total = 0.0;
    for (std::size_t i = 0; i < r.dims.size(); ++i) {
        int v = r.dims[i];
        if (v < 0 || v > 100) {
            throw ValidationError("TLX dimension " + std::to_string(i + 1) +
                                  " out of range 0..100: " + std::to_string(v));
        }
        if (invert_performance && i == 4) v = 100 - v;
        total += v;
    }
    return total / 6.0;
}

SummaryStats summarize(const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("no responses to summarize");
    SummaryStats s;
    s.n = values.size();
    s.mean = mean_of(values);
    s.sd = sample_sd(values);
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    return s;
}

std::string summary_to_json(const SummaryStats& s, const std::string& instrument) {
    json doc = {{"instrument", instrument}, {"n", s.n},     {"mean", s.mean},
                {"sd", s.sd},               {"min", s.min}, {"max", s.max}};
    return doc.dump(2);
}

std::string summary_to_csv(const SummaryStats& s, const std::string& instrument) {
    std::ostringstream out;
    out << "instrument,n,mean,sd,min,max\n";
    out << instrument << ',' << s.n << ',' << s.mean << ',' << s.sd << ',' << s.min << ','
        << s.max << '\n';
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

int parse_int_field(const std::string& s, std::size_t line_no, std::size_t col) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line_no, "column " + std::to_string(col + 1),
                         "not an integer: \"" + s + "\"");
    }
}

template <std::size_t N>
std::vector<std::array<int, N>> load_rows(std::istream& in,
                                          const std::array<const char*, N>& header) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ValidationError("empty CSV input");
    ++line_no;
    const auto head = split_csv_line(line);
    if (head.size() != N) {
        throw ParseError(line_no, "header",
                         "expected " + std::to_string(N) + " columns, got " +
                             std::to_string(head.size()));
    }
    for (std::size_t i = 0; i < N; ++i) {
        if (head[i] != header[i]) {
            throw ParseError(line_no, "header", "expected column \"" + std::string(header[i]) +
                                                    "\", got \"" + head[i] + "\"");
        }
    }

    std::vector<std::array<int, N>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != N) {
            throw ParseError(line_no, "", "expected " + std::to_string(N) + " fields, got " +
                                              std::to_string(fields.size()));
        }
        std::array<int, N> row{};
        for (std::size_t i = 0; i < N; ++i) row[i] = parse_int_field(fields[i], line_no, i);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::vector<SusResponse> load_sus_csv(std::istream& in) {
    static const std::array<const char*, 10> header = {"q1", "q2", "q3", "q4", "q5",
                                                       "q6", "q7", "q8", "q9", "q10"};
    std::vector<SusResponse> out;
    for (const auto& row : load_rows<10>(in, header)) out.push_back(SusResponse{row});
    return out;
}

std::vector<TlxResponse> load_tlx_csv(std::istream& in) {
    static const std::array<const char*, 6> header = {"mental", "physical",    "temporal",
                                                      "effort", "performance", "frustration"};
    std::vector<TlxResponse> out;
    for (const auto& row : load_rows<6>(in, header)) out.push_back(TlxResponse{row});
    return out;
}

}  // namespace cw
