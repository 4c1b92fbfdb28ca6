#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>

#include "cw/brainwrite.hpp"
#include "cw/clustering.hpp"
#include "cw/diversity.hpp"

namespace cw {

// Exit codes shared by the CLI and the pipeline runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitPartial = 4;

enum class Stage { session, embed, cluster, diversity, report };

const char* to_string(Stage s);
Stage stage_from_string(const std::string& s);
std::set<Stage> parse_stages(const std::string& csv);  // "session,embed,..."

struct PipelineConfig {
    // artifacts
    std::filesystem::path plan;          // session input
    std::filesystem::path corpus;        // JSON-Lines records
    std::filesystem::path cache;         // embedding cache (JSON-Lines)
    std::filesystem::path clusterings;   // retained clusterings per group
    std::filesystem::path report_json;   // diversity report
    std::filesystem::path report_out;    // rendered report
    std::filesystem::path manifest = "manifest.json";

    // generation backend: "mock" | "http"; the condition's model id is
    // passed through to the backend
    std::string backend = "mock";
    std::filesystem::path personas;  // optional persona pool override
    int rounds = 0;                  // 0 = plan default, else R = participants
    int increment_limit = 0;         // 0 = plan default (600)
    GenerationParams generation;

    // embedding provider: "mock" | "http"
    std::string embed_provider = "mock";
    std::string embed_model = "mock-embed";
    std::size_t embed_dim = 0;  // 0 = provider default (mock 64, http 3584)

    SweepOptions sweep;
    DiversityOptions diversity;
    std::string report_format = "md";  // md | csv | json

    int concurrency = 1;
    std::uint64_t seed = 0;

    void validate() const;  // throws ValidationError
};

// The batch of sessions a `session` stage runs: topics x conditions.
struct SessionPlan {
    std::vector<Topic> topics;
    std::vector<ConditionKey> conditions;
    int rounds = 0;
    int increment_limit = 600;
    std::string language = "en";
    std::vector<std::string> supervisor_notes;
};

SessionPlan load_session_plan(const std::filesystem::path& path);

// Per-stage runners. Each checks its inputs, writes its artifact through a
// ".partial" temp name, and records digests + parameters in the manifest.
// They throw ValidationError / ProviderError; run_session_stage returns
// false when a backend failure left a partial corpus behind.
bool run_session_stage(const PipelineConfig& config, std::ostream& log);
void run_embed_stage(const PipelineConfig& config, std::ostream& log);
void run_cluster_stage(const PipelineConfig& config, std::ostream& log);
void run_diversity_stage(const PipelineConfig& config, std::ostream& log);
void run_report_stage(const PipelineConfig& config, std::ostream& log);

// Runs the selected stages in pipeline order, mapping failures to exit
// codes: 2 validation, 3 provider/transport, 4 partial results on disk.
int run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages, std::ostream& log);

// Clusterings artifact I/O: {"params": ..., "groups": {G: {"sample_ids",
// "runs", "warnings"}}}; each run stores labels aligned to sample_ids.
std::string clusterings_to_json(const std::map<Group, GroupClusterings>& groups,
                                const std::map<Group, std::vector<std::string>>& warnings,
                                const SweepOptions& opts);
std::map<Group, GroupClusterings> clusterings_from_json(const std::string& text);

}  // namespace cw
