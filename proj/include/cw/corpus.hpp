#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cw/errors.hpp"

namespace cw {

enum class Group { G1, G2, G3 };
enum class IdeaClass { bk, raw, spbk, spraw };
enum class Domain { mathematical_sciences, finance, philosophy };
enum class Strategy { zero_shot, cot };

const char* to_string(Group g);
const char* to_string(IdeaClass c);
const char* to_string(Domain d);
const char* to_string(Strategy s);

Group group_from_string(const std::string& s);
IdeaClass idea_class_from_string(const std::string& s);
Domain domain_from_string(const std::string& s);
Strategy strategy_from_string(const std::string& s);

// sp* classes generate independently: one shot per agent, no shared sheet.
bool is_sp(IdeaClass c);

// G1 and G3 prompt zero-shot; G2 prompts with chain-of-thought.
Strategy strategy_for(Group g);

// Full experimental condition of one contribution.
struct ConditionKey {
    Group group = Group::G1;
    IdeaClass cls = IdeaClass::bk;
    std::string model;  // generation model id, e.g. "flash" | "air" | "plus"
    int participants = 1;
    Strategy strategy = Strategy::zero_shot;

    auto operator<=>(const ConditionKey&) const = default;
};

struct IdeaRecord {
    std::string id;
    std::string topic_id;
    Domain domain = Domain::finance;
    ConditionKey condition;
    int round = 1;  // 1-based; always 1 for sp* classes
    int agent = 0;  // 0 .. participants-1
    std::string lang = "en";
    std::string text;

    bool operator==(const IdeaRecord&) const = default;
};

// (group, class, model) address of a condition cell.
struct CellKey {
    Group group = Group::G1;
    IdeaClass cls = IdeaClass::bk;
    std::string model;

    auto operator<=>(const CellKey&) const = default;
};

CellKey cell_of(const IdeaRecord& r);
std::string to_string(const CellKey& key);
CellKey cell_from_string(const std::string& s);  // "G1/bk/flash"

// Materialized grouping of a corpus. Cells partition the record ids.
struct CorpusIndex {
    std::map<std::string, IdeaRecord> records;          // id -> record
    std::map<CellKey, std::vector<std::string>> cells;  // ids in input order
    std::map<std::string, std::vector<std::string>> by_topic;

    std::size_t size() const { return records.size(); }
};

struct ValidationIssue {
    std::string kind;    // "empty_cell" | "missing_topic" | "round_inconsistency" | "agent_inconsistency"
    std::string detail;
    std::vector<std::string> record_ids;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

// One JSON object per line. Rejects the first ill-formed line with its
// 1-based line number and the offending field (ParseError).
std::vector<IdeaRecord> parse_records(std::istream& in);
std::vector<IdeaRecord> load_corpus_file(const std::string& path);

// Single JSON line, no trailing newline. parse_records(serialize) round-trips.
std::string serialize_record(const IdeaRecord& r);
void write_records(std::ostream& out, const std::vector<IdeaRecord>& records);

// Groups records into (group, class, model) cells. Throws on duplicate ids.
CorpusIndex partition(const std::vector<IdeaRecord>& records);

// Report-only consistency pass: empty cells over the observed condition grid,
// topics missing from some cell, sp-round and agent-bound violations.
ValidationReport validate_corpus(const CorpusIndex& index);

std::string to_json(const ValidationReport& report);  // {"issues": [...]}

}  // namespace cw
