#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cw/vectormath.hpp"

namespace cw {

enum class PromptKind { general, reasoning };

// The verdict-eliciting cues the prompts end with.
inline constexpr char kAnswerCue[] = "Answer: ";
inline constexpr char kThinkClose[] = "</think>";

// Instantiates the sentiment probe template for an interview passage.
// General models get the "Answer: " cue; reasoning models get a closed think
// tag so the next predicted token is the verdict. Throws on empty text.
std::string build_sentiment_prompt(const std::string& interview_text, PromptKind kind);

// Top next-token candidates with their post-softmax probabilities, token
// embedding vectors, and the positive/negative anchor token vectors.
// Providers return exactly 10 candidates; the scoring math itself works for
// any count >= 1 (reduced fixtures).
struct NextTokenDistribution {
    std::vector<std::string> tokens;
    std::vector<double> probs;
    std::vector<Vec> token_vectors;
    Vec anchor_pos;
    Vec anchor_neg;
    std::string source_model;
};

// Shape checks plus renormalization of probs over the kept tokens.
// `expected_tokens` > 0 enforces the provider contract (10).
void validate_distribution(NextTokenDistribution& dist, int expected_tokens = 0);

// The 2 x n similarity matrix: row 0 = cos(anchor_pos, V_i), row 1 likewise
// for anchor_neg.
struct AnchorSimilarity {
    std::vector<double> c_pos;
    std::vector<double> c_neg;
};

AnchorSimilarity similarity_rows(const NextTokenDistribution& dist);

enum class ScoreNormalization {
    shift_floor,  // shift both raw components so the minimum is >= 0, then normalize
    raw_sum,      // divide raw components by their sum (may leave [0,1])
};

struct SentimentScore {
    double s_pos = 0.5;
    double s_neg = 0.5;
    double raw_pos = 0.0;  // P . C_pos before normalization
    double raw_neg = 0.0;  // P . C_neg
    std::string model;
};

// raw = (P.C_pos, P.C_neg); normalized per the chosen rule. A degenerate
// all-zero pair scores (0.5, 0.5).
SentimentScore score(const NextTokenDistribution& dist,
                     ScoreNormalization normalization = ScoreNormalization::shift_floor);

// Component-wise mean over models, renormalized to sum 1; model "ensemble".
SentimentScore aggregate_models(const std::vector<SentimentScore>& scores);

struct Interview {
    std::string id;
    std::string text;
};

class LogitProvider {
public:
    virtual ~LogitProvider() = default;
    virtual std::string model_id() const = 0;
    virtual PromptKind prompt_kind() const = 0;
    // Throws ProviderError on failure.
    virtual NextTokenDistribution probe(const Interview& interview,
                                        const std::string& prompt) = 0;
};

// Replays recorded distributions from fixture JSON:
//   {model, interview_id, tokens[10], probs[10], token_vectors[10][D],
//    anchor_pos[D], anchor_neg[D]}
// A file holds one object or an array; entries are grouped per model.
class FixtureReplayProvider final : public LogitProvider {
public:
    FixtureReplayProvider(std::string model, PromptKind kind = PromptKind::general);

    void add(const std::string& interview_id, NextTokenDistribution dist);

    std::string model_id() const override { return model_; }
    PromptKind prompt_kind() const override { return kind_; }
    NextTokenDistribution probe(const Interview& interview, const std::string& prompt) override;

    // All providers found across the given fixture files.
    static std::vector<std::unique_ptr<FixtureReplayProvider>> load_files(
        const std::vector<std::string>& paths);

private:
    std::string model_;
    PromptKind kind_;
    std::map<std::string, NextTokenDistribution> by_interview_;
};

struct InterviewScore {
    std::string interview_id;
    std::vector<SentimentScore> model_scores;   // successful providers, input order
    std::vector<std::string> skipped_models;    // providers that failed this item
    SentimentScore ensemble;
};

struct SentimentReport {
    ScoreNormalization normalization = ScoreNormalization::shift_floor;
    std::vector<InterviewScore> items;
};

// Scores every interview with every provider; a provider failing one item is
// skipped and recorded for that item. Throws ProviderError when all
// providers fail for an item.
SentimentReport score_interviews(const std::vector<Interview>& interviews,
                                 const std::vector<LogitProvider*>& providers,
                                 ScoreNormalization normalization = ScoreNormalization::shift_floor);

std::vector<Interview> load_interviews_file(const std::string& path);  // JSONL {id, text}

std::string sentiment_report_to_json(const SentimentReport& report);
std::string sentiment_report_to_csv(const SentimentReport& report);

}  // namespace cw
