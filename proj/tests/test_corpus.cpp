#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "cw/corpus.hpp"

using namespace cw;

namespace {

IdeaRecord make_record(const std::string& id, Group g, IdeaClass cls, const std::string& model,
                       const std::string& topic, int participants = 2, int round = 1,
                       int agent = 0) {
    IdeaRecord r;
    r.id = id;
    r.topic_id = topic;
    r.domain = Domain::finance;
    r.condition = {g, cls, model, participants, strategy_for(g)};
    r.round = round;
    r.agent = agent;
    r.lang = "en";
    r.text = "idea text for " + id;
    return r;
}

}  // namespace

TEST_CASE("parse_records accepts a valid line and round-trips") {
    IdeaRecord r = make_record("r1", Group::G1, IdeaClass::bk, "flash", "t1");
    std::istringstream in(serialize_record(r) + "\n");
    const auto records = parse_records(in);
    REQUIRE(records.size() == 1);
    CHECK(records[0] == r);
    CHECK(records[0].condition.strategy == Strategy::zero_shot);
}

TEST_CASE("parse_records on empty stream") {
    std::istringstream in("");
    CHECK(parse_records(in).empty());
}

TEST_CASE("parse_records rejects unknown enum naming line and field") {
    std::istringstream in(
        R"({"id":"r1","topic_id":"t","domain":"finance","condition":{"group":"G1","class":"xyz","model":"flash","participants":2},"round":1,"agent":0,"lang":"en","text":"x"})"
        "\n");
    try {
        parse_records(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.field() == "class");
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("parse_records rejects structural problems") {
    SUBCASE("malformed JSON") {
        std::istringstream in("{not json\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
    SUBCASE("missing field") {
        std::istringstream in(R"({"id":"r1","topic_id":"t"})" "\n");
        try {
            parse_records(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.field() == "domain");
        }
    }
    SUBCASE("duplicate id") {
        const std::string line =
            serialize_record(make_record("dup", Group::G1, IdeaClass::bk, "flash", "t"));
        std::istringstream in(line + "\n" + line + "\n");
        try {
            parse_records(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(e.field() == "id");
        }
    }
    SUBCASE("strategy contradicting group") {
        std::istringstream in(
            R"({"id":"r1","topic_id":"t","domain":"finance","condition":{"group":"G1","class":"bk","model":"flash","participants":2,"strategy":"cot"},"round":1,"agent":0,"lang":"en","text":"x"})"
            "\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
    SUBCASE("participants below one") {
        std::istringstream in(
            R"({"id":"r1","topic_id":"t","domain":"finance","condition":{"group":"G1","class":"bk","model":"flash","participants":0},"round":1,"agent":0,"lang":"en","text":"x"})"
            "\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
}

TEST_CASE("partition forms one cell per (group, class, model)") {
    SUBCASE("two records differing only in class") {
        const auto index = partition({make_record("a", Group::G1, IdeaClass::bk, "flash", "t"),
                                      make_record("b", Group::G1, IdeaClass::raw, "flash", "t")});
        CHECK(index.cells.size() == 2);
        for (const auto& [key, ids] : index.cells) CHECK(ids.size() == 1);
    }
    SUBCASE("4 classes x 3 models in one group") {
        std::vector<IdeaRecord> records;
        int i = 0;
        for (IdeaClass cls : {IdeaClass::bk, IdeaClass::raw, IdeaClass::spbk, IdeaClass::spraw}) {
            for (const std::string model : {"flash", "air", "plus"}) {
                records.push_back(
                    make_record("r" + std::to_string(i++), Group::G1, cls, model, "t"));
            }
        }
        const auto index = partition(records);
        CHECK(index.cells.size() == 12);
        for (const auto& [key, ids] : index.cells) CHECK(ids.size() == 1);
        CHECK(index.by_topic.at("t").size() == 12);
    }
    SUBCASE("empty input") {
        const auto index = partition({});
        CHECK(index.cells.empty());
        CHECK(index.records.empty());
    }
    SUBCASE("duplicate id rejected") {
        CHECK_THROWS_AS(partition({make_record("a", Group::G1, IdeaClass::bk, "flash", "t"),
                                   make_record("a", Group::G1, IdeaClass::raw, "flash", "t")}),
                        ValidationError);
    }
}

TEST_CASE("partition is a bijection on record ids") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<IdeaRecord> records;
    for (int i = 0; i < 200; ++i) {
        const IdeaClass cls = static_cast<IdeaClass>(pick(rng));
        const Group g = static_cast<Group>(pick(rng) % 3);
        const std::string model = pick(rng) % 2 ? "flash" : "air";
        records.push_back(make_record("r" + std::to_string(i), g, cls, model,
                                      "t" + std::to_string(pick(rng)), 3, is_sp(cls) ? 1 : 2, 1));
    }
    const auto index = partition(records);
    std::size_t total = 0;
    std::set<std::string> seen;
    for (const auto& [key, ids] : index.cells) {
        total += ids.size();
        for (const auto& id : ids) CHECK(seen.insert(id).second);
    }
    CHECK(total == records.size());
}

TEST_CASE("serialize/parse round-trip on random records") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<IdeaRecord> records;
    for (int i = 0; i < 50; ++i) {
        IdeaRecord r = make_record("id-" + std::to_string(i), static_cast<Group>(pick(rng) % 3),
                                   static_cast<IdeaClass>(pick(rng)), "plus",
                                   "topic-" + std::to_string(pick(rng)), 4,
                                   1 + pick(rng), pick(rng));
        r.text = "text with \"quotes\", unicode é中文, and\nnewline " +
                 std::to_string(i);
        if (is_sp(r.condition.cls)) r.round = 1;
        records.push_back(std::move(r));
    }
    std::ostringstream out;
    write_records(out, records);
    std::istringstream in(out.str());
    const auto parsed = parse_records(in);
    REQUIRE(parsed.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(parsed[i] == records[i]);
}

namespace {

// balanced fixture: 2 topics x 2 classes x 2 models, one record each
std::vector<IdeaRecord> balanced_fixture() {
    std::vector<IdeaRecord> records;
    int i = 0;
    for (const std::string topic : {"t1", "t2"}) {
        for (IdeaClass cls : {IdeaClass::bk, IdeaClass::spraw}) {
            for (const std::string model : {"flash", "air"}) {
                records.push_back(
                    make_record("r" + std::to_string(i++), Group::G1, cls, model, topic));
            }
        }
    }
    return records;
}

}  // namespace

TEST_CASE("validate_corpus") {
    SUBCASE("complete balanced fixture has no issues") {
        const auto report = validate_corpus(partition(balanced_fixture()));
        CHECK(report.ok());
        CHECK(to_json(report).find("issues") != std::string::npos);
    }
    SUBCASE("missing topic in one cell") {
        auto records = balanced_fixture();
        // drop t1's record in cell (G1, bk, flash)
        records.erase(std::remove_if(records.begin(), records.end(),
                                     [](const IdeaRecord& r) {
                                         return r.topic_id == "t1" &&
                                                r.condition.cls == IdeaClass::bk &&
                                                r.condition.model == "flash";
                                     }),
                      records.end());
        const auto report = validate_corpus(partition(records));
        REQUIRE(report.issues.size() == 1);
        CHECK(report.issues[0].kind == "missing_topic");
    }
    SUBCASE("sp record with round 3") {
        auto records = balanced_fixture();
        for (auto& r : records) {
            if (r.condition.cls == IdeaClass::spraw && r.id == "r2") r.round = 3;
        }
        const auto report = validate_corpus(partition(records));
        REQUIRE(report.issues.size() == 1);
        CHECK(report.issues[0].kind == "round_inconsistency");
        CHECK(report.issues[0].record_ids == std::vector<std::string>{"r2"});
    }
    SUBCASE("agent out of bounds") {
        auto records = balanced_fixture();
        records[0].agent = records[0].condition.participants;  // one past the end
        const auto report = validate_corpus(partition(records));
        REQUIRE(report.issues.size() == 1);
        CHECK(report.issues[0].kind == "agent_inconsistency");
    }
    SUBCASE("empty cell over the observed grid") {
        auto records = balanced_fixture();
        // remove every record of cell (G1, spraw, air): the grid still
        // implies it should exist
        records.erase(std::remove_if(records.begin(), records.end(),
                                     [](const IdeaRecord& r) {
                                         return r.condition.cls == IdeaClass::spraw &&
                                                r.condition.model == "air";
                                     }),
                      records.end());
        const auto report = validate_corpus(partition(records));
        bool found = false;
        for (const auto& issue : report.issues) {
            if (issue.kind == "empty_cell") found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("cell key string form") {
    const CellKey key{Group::G2, IdeaClass::spbk, "air"};
    CHECK(to_string(key) == "G2/spbk/air");
    CHECK(cell_from_string("G2/spbk/air") == key);
    CHECK_THROWS_AS(cell_from_string("nonsense"), ValidationError);
}
