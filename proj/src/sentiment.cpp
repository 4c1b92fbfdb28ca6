#include "cw/sentiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cw/errors.hpp"

namespace cw {

using nlohmann::json;

std::string build_sentiment_prompt(const std::string& interview_text, PromptKind kind) {
    if (interview_text.empty()) throw ValidationError("interview text is empty");
    std::string prompt = "input_text = \"" + interview_text + "\"\n";
    prompt += "what emotion does this passage express?\n";
    if (kind == PromptKind::general) {
        prompt += "(Please choose one from 'positive' and 'negative' only)\n";
        prompt += kAnswerCue;
    } else {
        prompt += "(Please choose one from 'positive' and 'negative' only; do not generate any"
                  " other content)\n";
        prompt += kThinkClose;
    }
    return prompt;
}

void validate_distribution(NextTokenDistribution& dist, int expected_tokens) {
    const std::size_t n = dist.tokens.size();
    if (n == 0) throw ValidationError("next-token distribution has no tokens");
    if (expected_tokens > 0 && n != static_cast<std::size_t>(expected_tokens)) {
        throw ValidationError("expected " + std::to_string(expected_tokens) + " tokens, got " +
                              std::to_string(n));
    }
    if (dist.probs.size() != n || dist.token_vectors.size() != n) {
        throw ValidationError("tokens/probs/vectors length mismatch");
    }
    const std::size_t dim = dist.anchor_pos.size();
    if (dim == 0 || dist.anchor_neg.size() != dim) {
        throw ValidationError("anchor vectors missing or dimension-mismatched");
    }
    if (norm(dist.anchor_pos) == 0.0 || norm(dist.anchor_neg) == 0.0) {
        throw ValidationError("zero-norm anchor vector");
    }
    double total = 0.0;
    for (double p : dist.probs) {
        if (!(p >= 0.0)) throw ValidationError("token probability must be >= 0");
        total += p;
    }
    if (total <= 0.0) throw ValidationError("token probabilities sum to zero");
    for (double& p : dist.probs) p /= total;  // renormalize over the kept tokens
    for (const auto& v : dist.token_vectors) {
        if (v.size() != dim) throw ValidationError("token vector dimension mismatch");
        if (!all_finite(v)) throw ValidationError("non-finite token vector entry");
        if (norm(v) == 0.0) throw ValidationError("zero-norm token vector");
    }
}

AnchorSimilarity similarity_rows(const NextTokenDistribution& dist) {
    AnchorSimilarity rows;
    rows.c_pos.reserve(dist.token_vectors.size());
    rows.c_neg.reserve(dist.token_vectors.size());
    for (const auto& v : dist.token_vectors) {
        rows.c_pos.push_back(cosine_similarity(dist.anchor_pos, v));
        rows.c_neg.push_back(cosine_similarity(dist.anchor_neg, v));
    }
    return rows;
}

SentimentScore score(const NextTokenDistribution& dist, ScoreNormalization normalization) {
    if (dist.probs.size() != dist.token_vectors.size() || dist.probs.empty()) {
        throw ValidationError("invalid next-token distribution");
    }
    const AnchorSimilarity rows = similarity_rows(dist);

    SentimentScore s;
    s.model = dist.source_model;
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        s.raw_pos += dist.probs[i] * rows.c_pos[i];
        s.raw_neg += dist.probs[i] * rows.c_neg[i];
    }

    double a = s.raw_pos;
    double b = s.raw_neg;
    if (normalization == ScoreNormalization::shift_floor) {
        const double shift = std::min(0.0, std::min(a, b));
        a -= shift;
        b -= shift;
    }
    const double total = a + b;
    if (std::fabs(total) < 1e-300) {
        s.s_pos = 0.5;
        s.s_neg = 0.5;
    } else {
        s.s_pos = a / total;
        s.s_neg = b / total;
    }
    return s;
}

SentimentScore aggregate_models(const std::vector<SentimentScore>& scores) {
    if (scores.empty()) throw ValidationError("cannot aggregate zero scores");
    SentimentScore out;
    out.model = "ensemble";
    double pos = 0.0;
    double neg = 0.0;
    for (const auto& s : scores) {
        pos += s.s_pos;
        neg += s.s_neg;
    }
    pos /= static_cast<double>(scores.size());
    neg /= static_cast<double>(scores.size());
    const double total = pos + neg;
    if (total <= 0.0) {
        out.s_pos = 0.5;
        out.s_neg = 0.5;
    } else {
        out.s_pos = pos / total;
        out.s_neg = neg / total;
    }
    out.raw_pos = pos;
    out.raw_neg = neg;
    return out;
}

FixtureReplayProvider::FixtureReplayProvider(std::string model, PromptKind kind)
    : model_(std::move(model)), kind_(kind) {}

void FixtureReplayProvider::add(const std::string& interview_id, NextTokenDistribution dist) {
    by_interview_[interview_id] = std::move(dist);
}

NextTokenDistribution FixtureReplayProvider::probe(const Interview& interview,
                                                   const std::string& /*prompt*/) {
    auto it = by_interview_.find(interview.id);
    if (it == by_interview_.end()) {
        throw ProviderError("no recorded distribution for interview \"" + interview.id +
                            "\" under model " + model_);
    }
    return it->second;
}

namespace {

NextTokenDistribution distribution_from_json(const json& obj) {
    NextTokenDistribution dist;
    dist.source_model = obj.at("model").get<std::string>();
    dist.tokens = obj.at("tokens").get<std::vector<std::string>>();
    dist.probs = obj.at("probs").get<std::vector<double>>();
    dist.token_vectors = obj.at("token_vectors").get<std::vector<Vec>>();
    dist.anchor_pos = obj.at("anchor_pos").get<Vec>();
    dist.anchor_neg = obj.at("anchor_neg").get<Vec>();
    validate_distribution(dist, 10);
    return dist;
}

}  // namespace

std::vector<std::unique_ptr<FixtureReplayProvider>> FixtureReplayProvider::load_files(
    const std::vector<std::string>& paths) {
    std::map<std::string, std::unique_ptr<FixtureReplayProvider>> providers;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open fixture file: " + path);
        json doc;
        try {
            in >> doc;
        } catch (const json::parse_error& e) {
            throw ValidationError("malformed fixture " + path + ": " + e.what());
        }
        const json entries = doc.is_array() ? doc : json::array({doc});
        for (const auto& obj : entries) {
            try {
                NextTokenDistribution dist = distribution_from_json(obj);
                const std::string model = dist.source_model;
                const std::string interview_id = obj.at("interview_id").get<std::string>();
                auto& provider = providers[model];
                if (!provider) {
                    const PromptKind kind = obj.value("prompt_kind", std::string("general")) ==
                                                    "reasoning"
                                                ? PromptKind::reasoning
                                                : PromptKind::general;
                    provider = std::make_unique<FixtureReplayProvider>(model, kind);
                }
                provider->add(interview_id, std::move(dist));
            } catch (const json::exception& e) {
                throw ValidationError("bad fixture entry in " + path + ": " + e.what());
            }
        }
    }
    std::vector<std::unique_ptr<FixtureReplayProvider>> out;
    out.reserve(providers.size());
    for (auto& [model, provider] : providers) out.push_back(std::move(provider));
    return out;
}

SentimentReport score_interviews(const std::vector<Interview>& interviews,
                                 const std::vector<LogitProvider*>& providers,
                                 ScoreNormalization normalization) {
    if (providers.empty()) throw ValidationError("no logit providers configured");
    SentimentReport report;
    report.normalization = normalization;
    for (const auto& interview : interviews) {
        InterviewScore item;
        item.interview_id = interview.id;
        for (LogitProvider* provider : providers) {
            try {
                const std::string prompt =
                    build_sentiment_prompt(interview.text, provider->prompt_kind());
                NextTokenDistribution dist = provider->probe(interview, prompt);
                validate_distribution(dist, 10);
                dist.source_model = provider->model_id();
                item.model_scores.push_back(score(dist, normalization));
            } catch (const std::exception&) {
                item.skipped_models.push_back(provider->model_id());
            }
        }
        if (item.model_scores.empty()) {
            throw ProviderError("all providers failed for interview \"" + interview.id + "\"");
        }
        item.ensemble = aggregate_models(item.model_scores);
        report.items.push_back(std::move(item));
    }
    return report;
}

std::vector<Interview> load_interviews_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open interviews file: " + path);
    std::vector<Interview> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            json obj = json::parse(line);
            out.push_back(Interview{obj.at("id").get<std::string>(),
                                    obj.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw ParseError(line_no, "", std::string("bad interview line: ") + e.what());
        }
    }
    return out;
}

namespace {

json score_to_json(const SentimentScore& s) {
    return {{"model", s.model},
            {"s_pos", s.s_pos},
            {"s_neg", s.s_neg},
            {"raw", {s.raw_pos, s.raw_neg}}};
}

}  // namespace

std::string sentiment_report_to_json(const SentimentReport& report) {
    json items = json::array();
    for (const auto& item : report.items) {
        json models = json::array();
        for (const auto& s : item.model_scores) models.push_back(score_to_json(s));
        items.push_back({{"interview_id", item.interview_id},
                         {"models", models},
                         {"ensemble", score_to_json(item.ensemble)},
                         {"skipped_models", item.skipped_models}});
    }
    json doc = {{"normalization", report.normalization == ScoreNormalization::shift_floor
                                      ? "shift_floor"
                                      : "raw_sum"},
                {"items", items}};
    return doc.dump(2);
}

std::string sentiment_report_to_csv(const SentimentReport& report) {
    std::ostringstream out;
    out << "interview_id,model,s_pos,s_neg\n";
    char buf[64];
    auto emit = [&](const std::string& id, const SentimentScore& s) {
        std::snprintf(buf, sizeof(buf), "%.9f,%.9f", s.s_pos, s.s_neg);
        out << id << ',' << s.model << ',' << buf << '\n';
    };
    for (const auto& item : report.items) {
        for (const auto& s : item.model_scores) emit(item.interview_id, s);
        emit(item.interview_id, item.ensemble);
    }
    return out.str();
}

}  // namespace cw
