#include "cw/brainwrite.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cw/errors.hpp"
#include "cw/hashing.hpp"

namespace cw {

using nlohmann::json;

MockTextBackend::MockTextBackend(std::string model) : model_(std::move(model)) {}

namespace {

const char* kMockSubjects[] = {
    "a rotating panel",   "a shared ledger",    "a scenario tree",  "an open review",
    "a paired critique",  "a staged rollout",   "a risk register",  "a feedback loop",
    "a concept map",      "an incentive pool",  "a peer audit",     "a sampling plan",
};

const char* kMockVerbs[] = {
    "could surface", "should rank",   "might reconcile", "can stress-test",
    "would cluster", "may decompose", "ought to replay", "could translate",
};

const char* kMockObjects[] = {
    "edge cases before committing",   "assumptions into testable claims",
    "trade-offs across stakeholders", "long-tail outcomes early",
    "competing framings side by side", "weak signals from the noise",
    "local insights into shared plans", "counterexamples systematically",
};

}  // namespace

std::string MockTextBackend::generate(const std::string& prompt, const GenerationParams& params) {
    std::mt19937_64 rng(mix64(fnv1a64(prompt) ^ fnv1a64(model_) ^ mix64(params.seed)));
    std::uniform_int_distribution<int> n_sentences(1, 3);
    std::uniform_int_distribution<std::size_t> subj(0, std::size(kMockSubjects) - 1);
    std::uniform_int_distribution<std::size_t> verb(0, std::size(kMockVerbs) - 1);
    std::uniform_int_distribution<std::size_t> obj(0, std::size(kMockObjects) - 1);

    std::string out;
    const int n = n_sentences(rng);
    for (int i = 0; i < n; ++i) {
        std::string s = kMockSubjects[subj(rng)];
        s += ' ';
        s += kMockVerbs[verb(rng)];
        s += ' ';
        s += kMockObjects[obj(rng)];
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        if (!out.empty()) out += ' ';
        out += s;
        out += '.';
    }
    return out;
}

const PersonaPool& default_persona_pool() {
    static const PersonaPool pool = {
        {Domain::mathematical_sciences,
         {"a combinatorics researcher", "a numerical analyst", "a probability theorist",
          "a graph-theory specialist", "a mathematical logician", "a statistician",
          "a dynamical-systems researcher", "an optimization specialist",
          "a computational geometer", "a number theorist", "a topologist",
          "an applied PDE researcher"}},
        {Domain::finance,
         {"a macro economist", "a retail banking strategist", "a quantitative risk analyst",
          "a venture capital partner", "a behavioral finance researcher",
          "a commodities trader", "an insurance actuary", "a regulatory compliance officer",
          "a fintech product manager", "a sovereign debt analyst", "a market microstructure researcher",
          "a household finance advisor"}},
        {Domain::philosophy,
         {"an ethicist", "an epistemologist", "a philosopher of science",
          "a political philosopher", "a phenomenologist", "a philosopher of mind",
          "a pragmatist philosopher", "a metaphysician", "an aesthetics scholar",
          "a philosopher of language", "a virtue-ethics scholar", "a decision theorist"}},
    };
    return pool;
}

PersonaPool load_persona_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open persona pool: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed persona pool: ") + e.what());
    }
    PersonaPool pool;
    for (const auto& [name, list] : doc.items()) {
        const Domain d = domain_from_string(name);
        for (const auto& entry : list) pool[d].push_back(entry.get<std::string>());
    }
    return pool;
}

std::vector<AgentPersona> build_personas(const ConditionKey& condition, Domain domain,
                                         std::uint64_t seed, const PersonaPool& pool) {
    const int c = condition.participants;
    if (c < 1) throw ValidationError("participants must be >= 1");
    auto it = pool.find(domain);
    if (it == pool.end() || static_cast<int>(it->second.size()) < c) {
        throw ValidationError(std::string("persona pool for ") + to_string(domain) +
                              " has fewer than " + std::to_string(c) + " entries");
    }

    std::vector<std::size_t> order(it->second.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix64(seed ^ fnv1a64(to_string(domain))));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<AgentPersona> personas;
    personas.reserve(c);
    for (int i = 0; i < c; ++i) {
        personas.push_back(AgentPersona{i, it->second[order[i]], "en"});
    }
    return personas;
}

std::string build_prompt(const AgentPersona& persona, const std::string& topic,
                         const std::vector<std::string>& sheet_history, Strategy strategy,
                         const std::string& background, int increment_limit) {
    std::ostringstream out;
    out << "You are " << persona.expertise
        << ". You contribute concise, concrete ideas in a structured ideation exercise.\n\n";
    out << "Topic: " << topic << "\n";
    if (!background.empty()) {
        out << "\nBackground:\n" << background << "\n";
    }
    if (!sheet_history.empty()) {
        out << "\nIdeas already on your sheet, oldest first:\n";
        for (std::size_t i = 0; i < sheet_history.size(); ++i) {
            out << (i + 1) << ". " << sheet_history[i] << "\n";
        }
    }
    if (strategy == Strategy::cot) {
        out << "\n" << kCotScaffold
            << " Reason briefly about the sheet before committing to a new idea, then give the"
               " idea itself as the final sentence.\n";
    }
    out << "\nWrite exactly one new idea in " << persona.language << ". Keep it under "
        << increment_limit << " characters.\n";
    return out.str();
}

std::vector<int> rotate_sheets(int round_index, int agents) {
    if (agents < 1) throw ValidationError("agents must be >= 1");
    if (round_index < 0) throw ValidationError("round index must be >= 0");
    std::vector<int> assignment(agents);
    for (int a = 0; a < agents; ++a) assignment[a] = (a + round_index) % agents;
    return assignment;
}

namespace {

bool is_sentence_end(char32_t cp) {
    switch (cp) {
        case U'.':
        case U'!':
        case U'?':
        case U'…':  // horizontal ellipsis
        case U'。':  // ideographic full stop
        case U'！':  // fullwidth !
        case U'？':  // fullwidth ?
            return true;
        default:
            return false;
    }
}

// Decodes one code point starting at byte i; advances i past it.
char32_t next_code_point(const std::string& s, std::size_t& i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if ((c & 0x80) == 0x00) {
        len = 1;
        cp = c;
    } else if ((c & 0xE0) == 0xC0) {
        len = 2;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        len = 3;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        len = 4;
        cp = c & 0x07;
    }
    for (std::size_t j = 1; j < len && i + j < s.size(); ++j) {
        cp = (cp << 6) | (static_cast<unsigned char>(s[i + j]) & 0x3F);
    }
    i += len;
    return cp;
}

}  // namespace

std::string truncate_increment(const std::string& text, int limit) {
    if (limit <= 0) throw ValidationError("increment limit must be positive");

    std::size_t count = 0;       // code points consumed
    std::size_t hard_cut = 0;    // byte offset of the limit-th code point's end
    std::size_t sentence_cut = 0;  // byte offset just past the last sentence end within limit
    std::size_t i = 0;
    while (i < text.size() && count < static_cast<std::size_t>(limit)) {
        const char32_t cp = next_code_point(text, i);
        ++count;
        hard_cut = i;
        if (is_sentence_end(cp)) sentence_cut = i;
    }
    if (i >= text.size() && count <= static_cast<std::size_t>(limit)) {
        return text;  // already within the limit
    }
    return text.substr(0, sentence_cut > 0 ? sentence_cut : hard_cut);
}

namespace {

std::string generate_with_retry(TextBackend& backend, const std::string& prompt,
                                const GenerationParams& params, const RetryPolicy& retry) {
    for (int attempt = 1;; ++attempt) {
        try {
            return backend.generate(prompt, params);
        } catch (const ProviderError&) {
            if (attempt >= retry.max_attempts) throw;
            std::this_thread::sleep_for(retry.backoff * (1 << (attempt - 1)));
        }
    }
}

std::string record_id(const Topic& topic, const ConditionKey& cond, int round, int agent) {
    std::string id = topic.id;
    id += ':';
    id += to_string(cond.group);
    id += ':';
    id += to_string(cond.cls);
    id += ':';
    id += cond.model;
    id += ":p";
    id += std::to_string(cond.participants);
    id += ":r";
    id += std::to_string(round);
    id += ":a";
    id += std::to_string(agent);
    return id;
}

}  // namespace

SessionTranscript run_session(const SessionConfig& config, const Topic& topic,
                              TextBackend& backend, const RetryPolicy& retry) {
    const int c = config.condition.participants;
    if (c < 1) throw ValidationError("participants must be >= 1");
    if (static_cast<int>(config.personas.size()) != c) {
        throw ValidationError("personas count " + std::to_string(config.personas.size()) +
                              " != participants " + std::to_string(c));
    }
    const bool sp = is_sp(config.condition.cls);
    const int rounds = sp ? 1 : (config.rounds > 0 ? config.rounds : c);

    SessionTranscript transcript;
    transcript.config = config;
    transcript.topic_id = topic.id;
    transcript.note_sheets.resize(c);

    GenerationParams params = config.generation;
    params.seed = config.seed;

    // prompt-visible sheet histories; supervisor notes land here but are not
    // contributions themselves
    std::vector<std::vector<std::string>> histories(c);

    for (int round = 1; round <= rounds; ++round) {
        const std::vector<int> assignment = rotate_sheets(round - 1, c);

        struct Pending {
            int agent;
            int sheet;
            std::string text;
        };
        std::vector<Pending> staged;
        staged.reserve(c);
        static const std::vector<std::string> kNoHistory;
        try {
            for (int agent = 0; agent < c; ++agent) {
                const int sheet = assignment[agent];
                const std::vector<std::string>& history = sp ? kNoHistory : histories[sheet];
                const std::string prompt =
                    build_prompt(config.personas[agent], topic.title, history,
                                 config.condition.strategy, config.background,
                                 config.increment_limit);
                std::string text = generate_with_retry(backend, prompt, params, retry);
                text = truncate_increment(text, config.increment_limit);
                staged.push_back({agent, sheet, std::move(text)});
            }
        } catch (const ProviderError& e) {
            transcript.partial = true;
            transcript.failure = "round " + std::to_string(round) + ": " + e.what();
            return transcript;  // completed rounds only
        }

        for (const auto& p : staged) {
            IdeaRecord record;
            record.id = record_id(topic, config.condition, round, p.agent);
            record.topic_id = topic.id;
            record.domain = topic.domain;
            record.condition = config.condition;
            record.round = round;
            record.agent = p.agent;
            record.lang = config.personas[p.agent].language;
            record.text = p.text;
            transcript.note_sheets[p.sheet].contribution_ids.push_back(record.id);
            histories[p.sheet].push_back(p.text);
            transcript.records.push_back(std::move(record));
        }

        // scripted supervisor note after this round, visible on every sheet
        const std::size_t note_index = static_cast<std::size_t>(round - 1);
        if (!sp && round < rounds && note_index < config.supervisor_notes.size()) {
            for (auto& h : histories) h.push_back(config.supervisor_notes[note_index]);
        }
    }
    return transcript;
}

}  // namespace cw
