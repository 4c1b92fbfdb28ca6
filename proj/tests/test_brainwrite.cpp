#include <doctest.h>

#include <set>

#include "cw/brainwrite.hpp"
#include "cw/errors.hpp"

using namespace cw;

namespace {

ConditionKey condition(IdeaClass cls, int participants, Group group = Group::G1) {
    return ConditionKey{group, cls, "flash", participants, strategy_for(group)};
}

SessionConfig make_config(IdeaClass cls, int participants, int rounds = 0,
                          std::uint64_t seed = 3) {
    SessionConfig config;
    config.condition = condition(cls, participants);
    config.rounds = rounds;
    config.increment_limit = 600;
    config.personas = build_personas(config.condition, Domain::finance, seed);
    config.backend_id = "mock:flash";
    config.seed = seed;
    return config;
}

Topic make_topic() {
    Topic t;
    t.id = "t1";
    t.domain = Domain::finance;
    t.title = "How should retail investors think about drawdowns?";
    t.background = "Recent volatility has unsettled new investors.";
    return t;
}

// fails every call from a given (round, agent) position onward
class FailAfterBackend final : public TextBackend {
public:
    FailAfterBackend(int fail_from_call) : fail_from_(fail_from_call) {}
    std::string id() const override { return "failing"; }
    std::string generate(const std::string& prompt, const GenerationParams& params) override {
        if (++calls_ >= fail_from_) throw ProviderError("synthetic backend outage");
        return inner_.generate(prompt, params);
    }

private:
    int fail_from_;
    int calls_ = 0;
    MockTextBackend inner_{"flash"};
};

}  // namespace

TEST_CASE("build_personas") {
    SUBCASE("single participant") {
        const auto ps = build_personas(condition(IdeaClass::bk, 1), Domain::finance, 1);
        REQUIRE(ps.size() == 1);
        CHECK(ps[0].index == 0);
        CHECK_FALSE(ps[0].expertise.empty());
    }
    SUBCASE("deterministic for a fixed seed") {
        const auto a = build_personas(condition(IdeaClass::bk, 4), Domain::philosophy, 9);
        const auto b = build_personas(condition(IdeaClass::bk, 4), Domain::philosophy, 9);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].expertise == b[i].expertise);
    }
    SUBCASE("three distinct finance personas drawn from the finance pool") {
        const auto ps = build_personas(condition(IdeaClass::bk, 3), Domain::finance, 2);
        REQUIRE(ps.size() == 3);
        const auto& pool = default_persona_pool().at(Domain::finance);
        std::set<std::string> seen;
        for (const auto& p : ps) {
            CHECK(seen.insert(p.expertise).second);  // distinct
            CHECK(std::find(pool.begin(), pool.end(), p.expertise) != pool.end());
        }
    }
    SUBCASE("pool smaller than C") {
        CHECK_THROWS_AS(build_personas(condition(IdeaClass::bk, 1000), Domain::finance, 0),
                        ValidationError);
    }
}

TEST_CASE("build_prompt section contract") {
    const AgentPersona persona{0, "a macro economist", "en"};

    SUBCASE("zero-shot without background or history") {
        const std::string p = build_prompt(persona, "topic X", {}, Strategy::zero_shot, "", 300);
        CHECK(p.find("a macro economist") != std::string::npos);
        CHECK(p.find("Topic: topic X") != std::string::npos);
        CHECK(p.find("Background:") == std::string::npos);
        CHECK(p.find("Ideas already on your sheet") == std::string::npos);
        CHECK(p.find(kCotScaffold) == std::string::npos);
        CHECK(p.find("300") != std::string::npos);
    }
    SUBCASE("cot strategy carries the literal scaffold marker") {
        const std::string p = build_prompt(persona, "topic X", {}, Strategy::cot, "", 300);
        CHECK(p.find(kCotScaffold) != std::string::npos);
    }
    SUBCASE("background section present iff provided") {
        const std::string p =
            build_prompt(persona, "topic X", {}, Strategy::zero_shot, "context here", 300);
        CHECK(p.find("Background:\ncontext here") != std::string::npos);
    }
    SUBCASE("history appears verbatim, oldest first") {
        const std::string p = build_prompt(persona, "topic X", {"first idea", "second idea"},
                                           Strategy::zero_shot, "", 300);
        const auto first = p.find("1. first idea");
        const auto second = p.find("2. second idea");
        REQUIRE(first != std::string::npos);
        REQUIRE(second != std::string::npos);
        CHECK(first < second);
    }
}

TEST_CASE("rotate_sheets") {
    CHECK(rotate_sheets(0, 3) == std::vector<int>{0, 1, 2});
    CHECK(rotate_sheets(1, 3) == std::vector<int>{1, 2, 0});
    CHECK(rotate_sheets(7, 1) == std::vector<int>{0});

    // each round's assignment is a permutation; over C rounds every agent
    // touches every sheet exactly once
    const int c = 5;
    std::vector<std::set<int>> sheets_by_agent(c);
    for (int round = 0; round < c; ++round) {
        const auto assignment = rotate_sheets(round, c);
        CHECK(std::set<int>(assignment.begin(), assignment.end()).size() ==
              static_cast<std::size_t>(c));
        for (int a = 0; a < c; ++a) sheets_by_agent[a].insert(assignment[a]);
    }
    for (const auto& sheets : sheets_by_agent) {
        CHECK(sheets.size() == static_cast<std::size_t>(c));
    }
}

TEST_CASE("truncate_increment") {
    SUBCASE("short text unchanged") {
        CHECK(truncate_increment("short text", 100) == "short text");
    }
    SUBCASE("cuts at the last sentence boundary within the limit") {
        std::string first(59, 'a');
        first += '.';
        std::string second(59, 'b');
        second += '.';
        const std::string text = first + " " + second;  // 121 chars total
        CHECK(truncate_increment(text, 80) == first);
    }
    SUBCASE("hard cut lands exactly on the limit") {
        const std::string long_sentence(200, 'x');
        const std::string cut = truncate_increment(long_sentence, 80);
        CHECK(cut.size() == 80);
    }
    SUBCASE("never splits a multibyte sequence") {
        std::string text;
        for (int i = 0; i < 50; ++i) text += "é";  // 2 bytes per code point
        const std::string cut = truncate_increment(text, 7);
        CHECK(cut.size() == 14);  // 7 code points, 14 bytes
        CHECK(truncate_increment(text, 100) == text);
    }
    SUBCASE("rejects non-positive limits") {
        CHECK_THROWS_AS(truncate_increment("x", 0), ValidationError);
    }
}

TEST_CASE("run_session brainwrite rotation trace (C=2, R=2)") {
    MockTextBackend backend("flash");
    const SessionConfig config = make_config(IdeaClass::bk, 2, 2);
    const Topic topic = make_topic();
    const auto t = run_session(config, topic, backend);

    REQUIRE(t.records.size() == 4);
    CHECK_FALSE(t.partial);
    REQUIRE(t.note_sheets.size() == 2);
    // round 1: agent a -> sheet a; round 2: agent a -> sheet (a+1) % 2
    REQUIRE(t.note_sheets[0].contribution_ids.size() == 2);
    CHECK(t.note_sheets[0].contribution_ids[0].find(":r1:a0") != std::string::npos);
    CHECK(t.note_sheets[0].contribution_ids[1].find(":r2:a1") != std::string::npos);
    CHECK(t.note_sheets[1].contribution_ids[0].find(":r1:a1") != std::string::npos);
    CHECK(t.note_sheets[1].contribution_ids[1].find(":r2:a0") != std::string::npos);
    for (const auto& r : t.records) {
        CHECK(r.condition.cls == IdeaClass::bk);
        CHECK(r.topic_id == "t1");
    }
}

TEST_CASE("run_session sp mode generates once per agent with no history") {
    MockTextBackend backend("flash");
    SessionConfig config = make_config(IdeaClass::spraw, 3, 5 /* ignored for sp */);
    config.background.clear();
    const auto t = run_session(config, make_topic(), backend);

    REQUIRE(t.records.size() == 3);
    for (const auto& r : t.records) CHECK(r.round == 1);
    for (const auto& sheet : t.note_sheets) CHECK(sheet.contribution_ids.size() == 1);

    // independent single shots: same output as a fresh prompt with no history
    const std::string prompt =
        build_prompt(config.personas[0], make_topic().title, {}, Strategy::zero_shot, "", 600);
    GenerationParams params = config.generation;
    params.seed = config.seed;
    CHECK(t.records[0].text == truncate_increment(backend.generate(prompt, params), 600));
}

TEST_CASE("run_session record count is C x R and honors the increment limit") {
    MockTextBackend backend("flash");
    SessionConfig config = make_config(IdeaClass::raw, 3, 4);
    config.increment_limit = 40;  // force truncation of most outputs
    const auto t = run_session(config, make_topic(), backend);
    CHECK(t.records.size() == 12);
    for (const auto& r : t.records) CHECK(r.text.size() <= 40);
}

TEST_CASE("run_session replays byte-identically against the mock backend") {
    MockTextBackend backend("flash");
    const SessionConfig config = make_config(IdeaClass::bk, 3, 3, 77);
    const auto a = run_session(config, make_topic(), backend);
    const auto b = run_session(config, make_topic(), backend);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].text == b.records[i].text);
        CHECK(a.records[i].id == b.records[i].id);
    }
}

TEST_CASE("run_session marks a mid-session backend failure as partial") {
    // C=2, R=3: fail from the first call of round 2 (call index 3)
    FailAfterBackend backend(3);
    RetryPolicy retry;
    retry.max_attempts = 2;
    retry.backoff = std::chrono::milliseconds(1);
    const SessionConfig config = make_config(IdeaClass::bk, 2, 3);
    const auto t = run_session(config, make_topic(), backend, retry);
    CHECK(t.partial);
    CHECK(t.records.size() == 2);  // round 1 only
    for (const auto& r : t.records) CHECK(r.round == 1);
    CHECK(t.failure.find("round 2") != std::string::npos);
}

TEST_CASE("supervisor notes are injected between rounds") {
    MockTextBackend backend("flash");
    SessionConfig config = make_config(IdeaClass::bk, 2, 2);
    config.supervisor_notes = {"steer toward practical steps"};
    const auto with_notes = run_session(config, make_topic(), backend);

    SessionConfig without = config;
    without.supervisor_notes.clear();
    const auto plain = run_session(without, make_topic(), backend);

    // round 1 identical, round 2 prompts see the note and diverge
    CHECK(with_notes.records[0].text == plain.records[0].text);
    CHECK(with_notes.records[2].text != plain.records[2].text);
}

TEST_CASE("mock backend is a pure function of prompt, model, and seed") {
    MockTextBackend a("flash");
    MockTextBackend b("flash");
    MockTextBackend other("air");
    GenerationParams params;
    params.seed = 5;
    CHECK(a.generate("prompt", params) == b.generate("prompt", params));
    CHECK(a.generate("prompt", params) != other.generate("prompt", params));
    GenerationParams reseeded = params;
    reseeded.seed = 6;
    CHECK(a.generate("prompt", params) != a.generate("prompt", reseeded));
}
