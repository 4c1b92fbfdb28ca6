#include "cw/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cw {

using nlohmann::json;

const char* to_string(Group g) {
    switch (g) {
        case Group::G1: return "G1";
        case Group::G2: return "G2";
        case Group::G3: return "G3";
    }
    return "?";
}

const char* to_string(IdeaClass c) {
    switch (c) {
        case IdeaClass::bk: return "bk";
        case IdeaClass::raw: return "raw";
        case IdeaClass::spbk: return "spbk";
        case IdeaClass::spraw: return "spraw";
    }
    return "?";
}

const char* to_string(Domain d) {
    switch (d) {
        case Domain::mathematical_sciences: return "mathematical_sciences";
        case Domain::finance: return "finance";
        case Domain::philosophy: return "philosophy";
    }
    return "?";
}

const char* to_string(Strategy s) {
    return s == Strategy::zero_shot ? "zero_shot" : "cot";
}

Group group_from_string(const std::string& s) {
    if (s == "G1") return Group::G1;
    if (s == "G2") return Group::G2;
    if (s == "G3") return Group::G3;
    throw ValidationError("unknown group value \"" + s + "\"");
}

IdeaClass idea_class_from_string(const std::string& s) {
    if (s == "bk") return IdeaClass::bk;
    if (s == "raw") return IdeaClass::raw;
    if (s == "spbk") return IdeaClass::spbk;
    if (s == "spraw") return IdeaClass::spraw;
    throw ValidationError("unknown class value \"" + s + "\"");
}

Domain domain_from_string(const std::string& s) {
    if (s == "mathematical_sciences") return Domain::mathematical_sciences;
    if (s == "finance") return Domain::finance;
    if (s == "philosophy") return Domain::philosophy;
    throw ValidationError("unknown domain value \"" + s + "\"");
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "zero_shot") return Strategy::zero_shot;
    if (s == "cot") return Strategy::cot;
    throw ValidationError("unknown strategy value \"" + s + "\"");
}

bool is_sp(IdeaClass c) { return c == IdeaClass::spbk || c == IdeaClass::spraw; }

Strategy strategy_for(Group g) {
    return g == Group::G2 ? Strategy::cot : Strategy::zero_shot;
}

CellKey cell_of(const IdeaRecord& r) {
    return CellKey{r.condition.group, r.condition.cls, r.condition.model};
}

std::string to_string(const CellKey& key) {
    std::string out = to_string(key.group);
    out += '/';
    out += to_string(key.cls);
    out += '/';
    out += key.model;
    return out;
}

CellKey cell_from_string(const std::string& s) {
    const auto p1 = s.find('/');
    const auto p2 = s.find('/', p1 == std::string::npos ? p1 : p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos) {
        throw ValidationError("cell key must look like \"G1/bk/flash\", got \"" + s + "\"");
    }
    CellKey key;
    key.group = group_from_string(s.substr(0, p1));
    key.cls = idea_class_from_string(s.substr(p1 + 1, p2 - p1 - 1));
    key.model = s.substr(p2 + 1);
    return key;
}

namespace {

// Pulls a field with a type check, mapping failures to the field name.
const json& need(const json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        throw ParseError(line, field, std::string("missing required field \"") + field + "\"");
    }
    return *it;
}

std::string need_string(const json& obj, const char* field, std::size_t line) {
    const json& v = need(obj, field, line);
    if (!v.is_string()) throw ParseError(line, field, std::string("field \"") + field + "\" must be a string");
    return v.get<std::string>();
}

int need_int(const json& obj, const char* field, std::size_t line, int min_value) {
    const json& v = need(obj, field, line);
    if (!v.is_number_integer()) {
        throw ParseError(line, field, std::string("field \"") + field + "\" must be an integer");
    }
    const int out = v.get<int>();
    if (out < min_value) {
        throw ParseError(line, field, std::string("field \"") + field + "\" must be >= " +
                                          std::to_string(min_value));
    }
    return out;
}

IdeaRecord record_from_json(const json& obj, std::size_t line) {
    if (!obj.is_object()) throw ParseError(line, "", "record line must be a JSON object");
    IdeaRecord r;
    r.id = need_string(obj, "id", line);
    r.topic_id = need_string(obj, "topic_id", line);
    try {
        r.domain = domain_from_string(need_string(obj, "domain", line));
    } catch (const ParseError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ParseError(line, "domain", e.what());
    }

    const json& cond = need(obj, "condition", line);
    if (!cond.is_object()) throw ParseError(line, "condition", "field \"condition\" must be an object");
    try {
        r.condition.group = group_from_string(need_string(cond, "group", line));
    } catch (const ParseError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ParseError(line, "group", e.what());
    }
    try {
        r.condition.cls = idea_class_from_string(need_string(cond, "class", line));
    } catch (const ParseError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ParseError(line, "class", e.what());
    }
    r.condition.model = need_string(cond, "model", line);
    r.condition.participants = need_int(cond, "participants", line, 1);
    r.condition.strategy = strategy_for(r.condition.group);
    if (cond.contains("strategy")) {
        Strategy declared;
        try {
            declared = strategy_from_string(cond.at("strategy").get<std::string>());
        } catch (const ValidationError& e) {
            throw ParseError(line, "strategy", e.what());
        }
        if (declared != r.condition.strategy) {
            throw ParseError(line, "strategy",
                             std::string("strategy \"") + to_string(declared) +
                                 "\" contradicts group " + to_string(r.condition.group));
        }
    }

    r.round = need_int(obj, "round", line, 0);
    r.agent = need_int(obj, "agent", line, 0);
    r.lang = need_string(obj, "lang", line);
    r.text = need_string(obj, "text", line);
    return r;
}

}  // namespace

std::vector<IdeaRecord> parse_records(std::istream& in) {
    std::vector<IdeaRecord> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, "", std::string("malformed JSON: ") + e.what());
        }
        IdeaRecord r = record_from_json(obj, line_no);
        if (!seen.insert(r.id).second) {
            throw ParseError(line_no, "id", "duplicate record id \"" + r.id + "\"");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<IdeaRecord> load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file: " + path);
    return parse_records(in);
}

std::string serialize_record(const IdeaRecord& r) {
    json cond = {
        {"group", to_string(r.condition.group)},
        {"class", to_string(r.condition.cls)},
        {"model", r.condition.model},
        {"participants", r.condition.participants},
        {"strategy", to_string(r.condition.strategy)},
    };
    json obj = {
        {"id", r.id},         {"topic_id", r.topic_id}, {"domain", to_string(r.domain)},
        {"condition", cond},  {"round", r.round},       {"agent", r.agent},
        {"lang", r.lang},     {"text", r.text},
    };
    return obj.dump();
}

void write_records(std::ostream& out, const std::vector<IdeaRecord>& records) {
    for (const auto& r : records) out << serialize_record(r) << '\n';
}

CorpusIndex partition(const std::vector<IdeaRecord>& records) {
    CorpusIndex index;
    for (const auto& r : records) {
        if (!index.records.emplace(r.id, r).second) {
            throw ValidationError("duplicate record id \"" + r.id + "\"");
        }
        index.cells[cell_of(r)].push_back(r.id);
        index.by_topic[r.topic_id].push_back(r.id);
    }
    return index;
}

ValidationReport validate_corpus(const CorpusIndex& index) {
    ValidationReport report;

    // Expected grid: cross product of condition values observed anywhere.
    std::set<Group> groups;
    std::set<IdeaClass> classes;
    std::set<std::string> models;
    std::set<std::string> topics;
    for (const auto& [id, r] : index.records) {
        groups.insert(r.condition.group);
        classes.insert(r.condition.cls);
        models.insert(r.condition.model);
        topics.insert(r.topic_id);
    }

    for (Group g : groups) {
        for (IdeaClass c : classes) {
            for (const auto& m : models) {
                CellKey key{g, c, m};
                auto it = index.cells.find(key);
                if (it == index.cells.end() || it->second.empty()) {
                    report.issues.push_back(
                        {"empty_cell", "no records in cell " + to_string(key), {}});
                    continue;
                }
                std::set<std::string> cell_topics;
                for (const auto& id : it->second) cell_topics.insert(index.records.at(id).topic_id);
                for (const auto& t : topics) {
                    if (!cell_topics.count(t)) {
                        report.issues.push_back(
                            {"missing_topic", "topic \"" + t + "\" absent from cell " + to_string(key), {}});
                    }
                }
            }
        }
    }

    for (const auto& [id, r] : index.records) {
        if (is_sp(r.condition.cls)) {
            if (r.round != 1) {
                report.issues.push_back({"round_inconsistency",
                                         "sp-class record has round " + std::to_string(r.round) +
                                             " (must be 1)",
                                         {id}});
            }
        } else if (r.round < 1) {
            report.issues.push_back(
                {"round_inconsistency", "brainwrite record has round < 1", {id}});
        }
        if (r.agent >= r.condition.participants) {
            report.issues.push_back({"agent_inconsistency",
                                     "agent " + std::to_string(r.agent) + " >= participants " +
                                         std::to_string(r.condition.participants),
                                     {id}});
        }
    }

    return report;
}

std::string to_json(const ValidationReport& report) {
    json issues = json::array();
    for (const auto& issue : report.issues) {
        issues.push_back({{"kind", issue.kind},
                          {"detail", issue.detail},
                          {"record_ids", issue.record_ids}});
    }
    return json{{"issues", issues}}.dump(2);
}

}  // namespace cw
