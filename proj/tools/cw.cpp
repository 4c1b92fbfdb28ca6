// cw - brainwrite corpus generation and diversity evaluation toolkit.
//
// Subcommands: session run, embed, cluster, diversity, report,
// sentiment score, survey sus|tlx, pipeline.
// Exit codes: 0 ok, 2 validation error, 3 provider/transport error,
// 4 partial pipeline.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cw/diversity.hpp"
#include "cw/errors.hpp"
#include "cw/pipeline.hpp"
#include "cw/sentiment.hpp"
#include "cw/survey.hpp"

namespace {

using namespace cw;

CLI::Option* add_seed_flag(CLI::App* cmd, std::uint64_t& seed) {
    return cmd->add_option("--seed", seed, "deterministic seed (defaults to 0 with a notice)");
}

void warn_default_seed(const CLI::Option* seed_opt) {
    if (seed_opt->count() == 0) {
        std::cerr << "notice: --seed not given; defaulting to 0 (never wall-clock)\n";
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path);
    out << content;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"brainwrite corpus generation and diversity evaluation"};
    app.require_subcommand(1);

    PipelineConfig config;
    int exit_code = kExitOk;

    std::string k_range_note =
        "clustering: --k-min/--k-max sweep range, --restarts seeded retries per k, --top retained";

    // ---- session run -------------------------------------------------------
    auto* session = app.add_subcommand("session", "generate idea records");
    auto* session_run = session->add_subcommand("run", "run scripted sessions from a plan");
    session_run->add_option("--plan", config.plan, "session plan JSON")->required();
    session_run->add_option("--out", config.corpus, "corpus JSON-Lines output")->required();
    session_run->add_option("--backend", config.backend, "mock | http");
    session_run->add_option("--personas", config.personas, "persona pool JSON override");
    session_run->add_option("--rounds", config.rounds, "rounds per brainwrite session");
    session_run->add_option("--increment-limit", config.increment_limit,
                            "max characters per contribution");
    session_run->add_option("--temperature", config.generation.temperature, "sampling temperature");
    session_run->add_option("--concurrency", config.concurrency, "concurrent sessions");
    session_run->add_option("--manifest", config.manifest, "manifest path");
    auto* session_seed = add_seed_flag(session_run, config.seed);
    session_run->parse_complete_callback([&, session_seed]() {
        warn_default_seed(session_seed);
        exit_code = guarded([&]() { return run_pipeline(config, {Stage::session}, std::cout); });
    });

    // ---- embed -------------------------------------------------------------
    auto* embed = app.add_subcommand("embed", "embed corpus texts into the vector cache");
    embed->add_option("--corpus", config.corpus, "corpus JSON-Lines")->required();
    embed->add_option("--cache", config.cache, "embedding cache JSON-Lines")->required();
    embed->add_option("--provider", config.embed_provider, "mock | http");
    embed->add_option("--model", config.embed_model, "embedding model id");
    embed->add_option("--dim", config.embed_dim, "embedding dimension");
    embed->add_option("--manifest", config.manifest, "manifest path");
    embed->parse_complete_callback([&]() {
        exit_code = guarded([&]() { return run_pipeline(config, {Stage::embed}, std::cout); });
    });

    // ---- cluster -----------------------------------------------------------
    auto* cluster = app.add_subcommand("cluster", k_range_note);
    cluster->add_option("--corpus", config.corpus, "corpus JSON-Lines")->required();
    cluster->add_option("--cache", config.cache, "embedding cache JSON-Lines")->required();
    cluster->add_option("--out", config.clusterings, "clusterings JSON output")->required();
    cluster->add_option("--k-min", config.sweep.k_min, "smallest k (default 3)");
    cluster->add_option("--k-max", config.sweep.k_max, "largest k (default 12)");
    cluster->add_option("--restarts", config.sweep.restarts, "restarts per k");
    cluster->add_option("--top", config.sweep.top, "clusterings retained");
    cluster->add_option("--tol", config.sweep.lloyd.tol, "convergence tolerance");
    cluster->add_option("--max-iter", config.sweep.lloyd.max_iter, "Lloyd iteration cap");
    cluster->add_option("--concurrency", config.concurrency, "parallel restarts");
    cluster->add_option("--manifest", config.manifest, "manifest path");
    auto* cluster_seed = add_seed_flag(cluster, config.sweep.seed);
    cluster->parse_complete_callback([&, cluster_seed]() {
        warn_default_seed(cluster_seed);
        exit_code = guarded([&]() { return run_pipeline(config, {Stage::cluster}, std::cout); });
    });

    // ---- diversity ---------------------------------------------------------
    auto* diversity = app.add_subcommand("diversity", "entropy report over condition cells");
    std::string granularity = "class-model";
    std::vector<std::string> compare_cells;
    std::string compare_test = "welch";
    diversity->add_option("--corpus", config.corpus, "corpus JSON-Lines")->required();
    diversity->add_option("--clusterings", config.clusterings, "clusterings JSON")->required();
    diversity->add_option("--out", config.report_json, "diversity report JSON output")->required();
    diversity->add_option("--base", config.diversity.base, "entropy logarithm base (default 2)");
    diversity->add_option("--granularity", granularity,
                          "class | class-model | class-model-participants");
    diversity->add_flag("--per-topic", config.diversity.per_topic,
                        "also emit per-topic entropies (needed for --compare)");
    diversity->add_option("--compare", compare_cells,
                          "two cell keys (e.g. G1/bk/flash) to test against each other")
        ->expected(2);
    diversity->add_option("--test", compare_test, "welch | mannwhitney");
    diversity->add_option("--manifest", config.manifest, "manifest path");
    diversity->parse_complete_callback([&]() {
        exit_code = guarded([&]() {
            config.diversity.granularity = granularity_from_string(granularity);
            if (!compare_cells.empty()) config.diversity.per_topic = true;
            const int rc = run_pipeline(config, {Stage::diversity}, std::cout);
            if (rc != kExitOk || compare_cells.empty()) return rc;
            const DiversityReport report = report_from_json(slurp(config.report_json.string()));
            const auto result = compare_conditions(
                report, diversity_cell_from_string(compare_cells[0]),
                diversity_cell_from_string(compare_cells[1]),
                compare_test == "mannwhitney" ? ComparisonTest::mann_whitney
                                              : ComparisonTest::welch);
            std::cout << "{\"test\": \"" << compare_test << "\", \"statistic\": "
                      << result.statistic << ", \"p_value\": " << result.p_value
                      << ", \"n_a\": " << result.n_a << ", \"n_b\": " << result.n_b << "}\n";
            return kExitOk;
        });
    });

    // ---- report ------------------------------------------------------------
    auto* report = app.add_subcommand("report", "render a diversity report");
    report->add_option("--in", config.report_json, "diversity report JSON")->required();
    report->add_option("--out", config.report_out, "rendered output")->required();
    report->add_option("--format", config.report_format, "md | csv | json");
    report->add_option("--manifest", config.manifest, "manifest path");
    report->parse_complete_callback([&]() {
        exit_code = guarded([&]() { return run_pipeline(config, {Stage::report}, std::cout); });
    });

    // ---- sentiment score ----------------------------------------------------
    auto* sentiment = app.add_subcommand("sentiment", "interview sentiment scoring");
    auto* sentiment_score = sentiment->add_subcommand("score", "score interviews from fixtures");
    std::string interviews_path;
    std::vector<std::string> fixture_paths;
    std::string sentiment_out;
    std::string sentiment_csv;
    std::string normalization = "shift";
    sentiment_score->add_option("--interviews", interviews_path, "interviews JSONL {id, text}")
        ->required();
    sentiment_score
        ->add_option("--fixtures", fixture_paths, "recorded next-token distribution JSON files")
        ->required()
        ->expected(-1);
    sentiment_score->add_option("--out", sentiment_out, "report JSON output");
    sentiment_score->add_option("--csv", sentiment_csv, "also write a CSV rendering");
    sentiment_score->add_option("--normalization", normalization, "shift | raw");
    sentiment_score->parse_complete_callback([&]() {
        exit_code = guarded([&]() {
            const auto interviews = load_interviews_file(interviews_path);
            auto providers = FixtureReplayProvider::load_files(fixture_paths);
            std::vector<LogitProvider*> raw;
            raw.reserve(providers.size());
            for (auto& p : providers) raw.push_back(p.get());
            const auto norm_mode = normalization == "raw" ? ScoreNormalization::raw_sum
                                                          : ScoreNormalization::shift_floor;
            const SentimentReport result = score_interviews(interviews, raw, norm_mode);
            write_or_print(sentiment_out, sentiment_report_to_json(result) + "\n");
            if (!sentiment_csv.empty()) {
                write_or_print(sentiment_csv, sentiment_report_to_csv(result));
            }
            return kExitOk;
        });
    });

    // ---- survey sus|tlx ------------------------------------------------------
    auto* survey = app.add_subcommand("survey", "score human-factors instruments");
    std::string survey_in;
    std::string survey_out;
    std::string survey_format = "json";
    bool invert_performance = false;
    auto* survey_sus = survey->add_subcommand("sus", "System Usability Scale");
    survey_sus->add_option("--in", survey_in, "responses CSV (q1..q10)")->required();
    survey_sus->add_option("--out", survey_out, "summary output (stdout if omitted)");
    survey_sus->add_option("--format", survey_format, "json | csv");
    survey_sus->parse_complete_callback([&]() {
        exit_code = guarded([&]() {
            std::ifstream in(survey_in);
            if (!in) throw ValidationError("cannot open " + survey_in);
            const auto responses = load_sus_csv(in);
            std::vector<double> scores;
            scores.reserve(responses.size());
            for (const auto& r : responses) scores.push_back(sus_score(r));
            const auto stats = summarize(scores);
            write_or_print(survey_out, survey_format == "csv"
                                           ? summary_to_csv(stats, "sus")
                                           : summary_to_json(stats, "sus") + "\n");
            return kExitOk;
        });
    });
    auto* survey_tlx = survey->add_subcommand("tlx", "Raw NASA-TLX");
    survey_tlx->add_option("--in", survey_in, "responses CSV (mental..frustration)")->required();
    survey_tlx->add_option("--out", survey_out, "summary output (stdout if omitted)");
    survey_tlx->add_option("--format", survey_format, "json | csv");
    survey_tlx->add_flag("--invert-performance", invert_performance,
                         "treat higher performance ratings as lower load");
    survey_tlx->parse_complete_callback([&]() {
        exit_code = guarded([&]() {
            std::ifstream in(survey_in);
            if (!in) throw ValidationError("cannot open " + survey_in);
            const auto responses = load_tlx_csv(in);
            std::vector<double> scores;
            scores.reserve(responses.size());
            for (const auto& r : responses) scores.push_back(tlx_raw(r, invert_performance));
            const auto stats = summarize(scores);
            write_or_print(survey_out, survey_format == "csv"
                                           ? summary_to_csv(stats, "tlx")
                                           : summary_to_json(stats, "tlx") + "\n");
            return kExitOk;
        });
    });

    // ---- pipeline -------------------------------------------------------------
    auto* pipeline = app.add_subcommand("pipeline", "run a stage subset in order");
    std::string stages_csv = "session,embed,cluster,diversity,report";
    std::string granularity_pipeline = "class-model";
    pipeline->add_option("--stages", stages_csv, "comma-separated stage subset");
    pipeline->add_option("--plan", config.plan, "session plan JSON");
    pipeline->add_option("--corpus", config.corpus, "corpus JSON-Lines");
    pipeline->add_option("--cache", config.cache, "embedding cache");
    pipeline->add_option("--clusterings", config.clusterings, "clusterings JSON");
    pipeline->add_option("--report-json", config.report_json, "diversity report JSON");
    pipeline->add_option("--report-out", config.report_out, "rendered report");
    pipeline->add_option("--format", config.report_format, "md | csv | json");
    pipeline->add_option("--backend", config.backend, "mock | http");
    pipeline->add_option("--personas", config.personas, "persona pool JSON override");
    pipeline->add_option("--rounds", config.rounds, "rounds per brainwrite session");
    pipeline->add_option("--increment-limit", config.increment_limit, "contribution limit");
    pipeline->add_option("--provider", config.embed_provider, "embedding provider: mock | http");
    pipeline->add_option("--model", config.embed_model, "embedding model id");
    pipeline->add_option("--dim", config.embed_dim, "embedding dimension");
    pipeline->add_option("--k-min", config.sweep.k_min, "smallest k");
    pipeline->add_option("--k-max", config.sweep.k_max, "largest k");
    pipeline->add_option("--restarts", config.sweep.restarts, "restarts per k");
    pipeline->add_option("--top", config.sweep.top, "clusterings retained");
    pipeline->add_option("--base", config.diversity.base, "entropy base");
    pipeline->add_option("--granularity", granularity_pipeline, "cell granularity");
    pipeline->add_flag("--per-topic", config.diversity.per_topic, "per-topic entropies");
    pipeline->add_option("--concurrency", config.concurrency, "parallelism limit");
    pipeline->add_option("--manifest", config.manifest, "manifest path");
    auto* pipeline_seed = add_seed_flag(pipeline, config.seed);
    pipeline->parse_complete_callback([&, pipeline_seed]() {
        warn_default_seed(pipeline_seed);
        exit_code = guarded([&]() {
            config.sweep.seed = config.seed;
            config.diversity.granularity = granularity_from_string(granularity_pipeline);
            return run_pipeline(config, parse_stages(stages_csv), std::cout);
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return exit_code;
}
