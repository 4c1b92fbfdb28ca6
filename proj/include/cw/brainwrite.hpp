#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cw/corpus.hpp"

namespace cw {

struct AgentPersona {
    int index = 0;
    std::string expertise;  // e.g. "macro economist"
    std::string language = "en";
};

struct Topic {
    std::string id;
    Domain domain = Domain::finance;
    std::string title;       // the discussion prompt itself
    std::string background;  // optional; used by bk/spbk sessions
};

struct GenerationParams {
    double temperature = 0.7;
    double top_p = 1.0;
    int max_tokens = 512;
    std::uint64_t seed = 0;
};

struct SessionConfig {
    ConditionKey condition;
    int rounds = 0;  // 0 = default (one full sheet rotation: R = participants)
    int increment_limit = 600;
    std::string background;  // non-empty iff class is bk/spbk
    std::vector<AgentPersona> personas;
    std::string backend_id;
    std::uint64_t seed = 0;
    GenerationParams generation;
    std::vector<std::string> supervisor_notes;  // injected between rounds
};

struct NoteSheet {
    std::vector<std::string> contribution_ids;  // in arrival order
};

struct SessionTranscript {
    SessionConfig config;
    std::string topic_id;
    std::vector<IdeaRecord> records;
    std::vector<NoteSheet> note_sheets;
    bool partial = false;
    std::string failure;  // set when partial
};

// The one capability a generation backend must provide.
class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual std::string id() const = 0;
    // Throws ProviderError on transport failure.
    virtual std::string generate(const std::string& prompt, const GenerationParams& params) = 0;
};

// Deterministic offline backend: output is a pure function of
// (prompt, model id, params.seed). Same transcript on every replay.
class MockTextBackend final : public TextBackend {
public:
    explicit MockTextBackend(std::string model = "mock-chat");
    std::string id() const override { return model_; }
    std::string generate(const std::string& prompt, const GenerationParams& params) override;

private:
    std::string model_;
};

using PersonaPool = std::map<Domain, std::vector<std::string>>;

const PersonaPool& default_persona_pool();
PersonaPool load_persona_pool(const std::string& path);  // {"finance": ["...", ...], ...}

// Seeded draw of C distinct personas from the domain's pool.
// Throws ValidationError when the pool is smaller than C.
std::vector<AgentPersona> build_personas(const ConditionKey& condition, Domain domain,
                                         std::uint64_t seed,
                                         const PersonaPool& pool = default_persona_pool());

// Literal scaffold inserted for chain-of-thought prompting.
inline constexpr char kCotScaffold[] = "Let's think step by step.";

// Assembles the agent prompt: persona framing, topic, background (iff
// given), sheet history (iff non-empty, oldest first), strategy scaffold,
// length instruction. Templates are reproduced verbatim in docs/prompts.md.
std::string build_prompt(const AgentPersona& persona, const std::string& topic,
                         const std::vector<std::string>& sheet_history, Strategy strategy,
                         const std::string& background, int increment_limit);

// Round-robin note passing: agent a writes on sheet (a + round_index) mod C.
std::vector<int> rotate_sheets(int round_index, int agents);

// Cuts text to the limit at the last sentence boundary, falling back to a
// hard cut. The limit counts Unicode code points; cuts never split a UTF-8
// sequence.
std::string truncate_increment(const std::string& text, int limit);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff{100};
};

// Runs one session. Brainwrite classes rotate sheets for R rounds; sp
// classes generate once per agent with no history. Backend failure after
// retries yields a transcript truncated to the last completed round with
// partial = true.
SessionTranscript run_session(const SessionConfig& config, const Topic& topic,
                              TextBackend& backend, const RetryPolicy& retry = {});

}  // namespace cw
