#include "cw/pipeline.hpp"

#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cw/digest.hpp"
#include "cw/embedding.hpp"
#include "cw/errors.hpp"
#include "cw/hashing.hpp"
#include "cw/http_adapters.hpp"

namespace cw {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(Stage s) {
    switch (s) {
        case Stage::session: return "session";
        case Stage::embed: return "embed";
        case Stage::cluster: return "cluster";
        case Stage::diversity: return "diversity";
        case Stage::report: return "report";
    }
    return "?";
}

Stage stage_from_string(const std::string& s) {
    if (s == "session") return Stage::session;
    if (s == "embed") return Stage::embed;
    if (s == "cluster") return Stage::cluster;
    if (s == "diversity") return Stage::diversity;
    if (s == "report") return Stage::report;
    throw ValidationError("unknown stage \"" + s + "\"");
}

std::set<Stage> parse_stages(const std::string& csv) {
    std::set<Stage> stages;
    std::istringstream in(csv);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (!token.empty()) stages.insert(stage_from_string(token));
    }
    if (stages.empty()) throw ValidationError("no stages selected");
    return stages;
}

void PipelineConfig::validate() const {
    std::set<std::string> seen;
    for (const auto* p : {&plan, &corpus, &cache, &clusterings, &report_json, &report_out}) {
        if (p->empty()) continue;
        if (!seen.insert(p->string()).second) {
            throw ValidationError("artifact paths must be distinct: " + p->string() +
                                  " appears twice");
        }
    }
    if (sweep.k_min > sweep.k_max) throw ValidationError("k_min must be <= k_max");
    if (sweep.top < 1) throw ValidationError("top must be >= 1");
    if (sweep.restarts < 1) throw ValidationError("restarts must be >= 1");
    if (concurrency < 1) throw ValidationError("concurrency must be >= 1");
    if (backend != "mock" && backend != "http") {
        throw ValidationError("backend must be \"mock\" or \"http\"");
    }
    if (embed_provider != "mock" && embed_provider != "http") {
        throw ValidationError("embedding provider must be \"mock\" or \"http\"");
    }
    if (report_format != "md" && report_format != "csv" && report_format != "json") {
        throw ValidationError("report format must be md, csv, or json");
    }
    if (diversity.base <= 1.0) throw ValidationError("entropy base must be > 1");
}

SessionPlan load_session_plan(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("missing input: cannot open session plan " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed session plan: " + std::string(e.what()));
    }
    SessionPlan plan;
    try {
        for (const auto& t : doc.at("topics")) {
            Topic topic;
            topic.id = t.at("id").get<std::string>();
            topic.domain = domain_from_string(t.at("domain").get<std::string>());
            topic.title = t.at("title").get<std::string>();
            topic.background = t.value("background", std::string());
            plan.topics.push_back(std::move(topic));
        }
        for (const auto& c : doc.at("conditions")) {
            ConditionKey key;
            key.group = group_from_string(c.at("group").get<std::string>());
            key.cls = idea_class_from_string(c.at("class").get<std::string>());
            key.model = c.at("model").get<std::string>();
            key.participants = c.at("participants").get<int>();
            if (key.participants < 1) throw ValidationError("participants must be >= 1");
            key.strategy = strategy_for(key.group);
            plan.conditions.push_back(std::move(key));
        }
        plan.rounds = doc.value("rounds", 0);
        plan.increment_limit = doc.value("increment_limit", 600);
        plan.language = doc.value("language", std::string("en"));
        plan.supervisor_notes =
            doc.value("supervisor_notes", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw ValidationError("bad session plan: " + std::string(e.what()));
    }
    if (plan.topics.empty()) throw ValidationError("session plan has no topics");
    if (plan.conditions.empty()) throw ValidationError("session plan has no conditions");
    if (plan.increment_limit < 1) throw ValidationError("increment_limit must be positive");
    return plan;
}

namespace {

void require_input(const fs::path& path, const char* what) {
    if (path.empty()) {
        throw ValidationError(std::string("no path configured for ") + what);
    }
    if (!fs::exists(path)) {
        throw ValidationError("missing input: " + std::string(what) + " file " + path.string() +
                              " does not exist");
    }
}

// Whole-artifact writes go through "<path>.partial" and rename on success.
void write_artifact(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ValidationError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void update_manifest(const PipelineConfig& config, const std::string& stage,
                     const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                     const json& params) {
    if (config.manifest.empty()) return;
    json doc = json::object();
    if (fs::exists(config.manifest)) {
        std::ifstream in(config.manifest);
        try {
            in >> doc;
        } catch (const json::parse_error&) {
            doc = json::object();  // rebuilt below
        }
    }
    json in_digests = json::object();
    for (const auto& p : inputs) in_digests[p.string()] = sha256_file(p);
    json out_digests = json::object();
    for (const auto& p : outputs) out_digests[p.string()] = sha256_file(p);
    doc[stage] = {{"inputs", in_digests}, {"outputs", out_digests}, {"params", params}};
    write_artifact(config.manifest, doc.dump(2));
}

std::unique_ptr<TextBackend> make_backend(const PipelineConfig& config, const std::string& model) {
    if (config.backend == "mock") return std::make_unique<MockTextBackend>(model);
    return std::make_unique<HttpChatBackend>(endpoint_from_env("CHAT"), model);
}

std::unique_ptr<EmbeddingProvider> make_embed_provider(const PipelineConfig& config) {
    if (config.embed_provider == "mock") {
        const std::size_t dim = config.embed_dim ? config.embed_dim : 64;
        return std::make_unique<MockEmbeddingProvider>(dim, config.embed_model);
    }
    const std::size_t dim = config.embed_dim ? config.embed_dim : 3584;
    return std::make_unique<HttpEmbeddingProvider>(endpoint_from_env("EMBEDDING"),
                                                   config.embed_model, dim);
}

}  // namespace

bool run_session_stage(const PipelineConfig& config, std::ostream& log) {
    require_input(config.plan, "session plan");
    if (config.corpus.empty()) throw ValidationError("no corpus path configured");

    SessionPlan plan = load_session_plan(config.plan);
    if (config.rounds > 0) plan.rounds = config.rounds;
    if (config.increment_limit > 0) plan.increment_limit = config.increment_limit;

    const PersonaPool pool = config.personas.empty() ? default_persona_pool()
                                                     : load_persona_pool(config.personas.string());

    struct Job {
        Topic topic;
        ConditionKey condition;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& topic : plan.topics) {
        for (const auto& condition : plan.conditions) {
            const std::string salt = topic.id + "|" +
                                     to_string(CellKey{condition.group, condition.cls,
                                                       condition.model}) +
                                     "|p" + std::to_string(condition.participants);
            jobs.push_back({topic, condition, mix64(config.seed ^ fnv1a64(salt))});
        }
    }

    auto run_one = [&](const Job& job) {
        SessionConfig session;
        session.condition = job.condition;
        session.rounds = plan.rounds;
        session.increment_limit = plan.increment_limit;
        if (job.condition.cls == IdeaClass::bk || job.condition.cls == IdeaClass::spbk) {
            session.background = job.topic.background;
        }
        session.personas =
            build_personas(job.condition, job.topic.domain, mix64(job.seed ^ 0xa5a5a5a5ULL), pool);
        for (auto& p : session.personas) p.language = plan.language;
        session.backend_id = config.backend + ":" + job.condition.model;
        session.seed = job.seed;
        session.generation = config.generation;
        session.supervisor_notes = plan.supervisor_notes;
        auto backend = make_backend(config, job.condition.model);
        return run_session(session, job.topic, *backend);
    };

    // bounded concurrency in deterministic plan order
    std::vector<SessionTranscript> transcripts(jobs.size());
    for (std::size_t base = 0; base < jobs.size();
         base += static_cast<std::size_t>(config.concurrency)) {
        const std::size_t end =
            std::min(jobs.size(), base + static_cast<std::size_t>(config.concurrency));
        std::vector<std::future<SessionTranscript>> futs;
        for (std::size_t i = base; i < end; ++i) {
            futs.push_back(std::async(std::launch::async, run_one, jobs[i]));
        }
        for (std::size_t i = base; i < end; ++i) transcripts[i] = futs[i - base].get();
    }

    std::vector<IdeaRecord> records;
    bool partial = false;
    std::string failure;
    for (std::size_t i = 0; i < transcripts.size(); ++i) {
        const auto& t = transcripts[i];
        records.insert(records.end(), t.records.begin(), t.records.end());
        if (t.partial) {
            partial = true;
            failure = "session " + std::to_string(i) + " (" + t.topic_id + "): " + t.failure;
        }
    }

    std::ostringstream buf;
    write_records(buf, records);
    if (partial) {
        const fs::path partial_path = config.corpus.string() + ".partial";
        std::ofstream out(partial_path, std::ios::trunc);
        out << buf.str();
        log << "session stage partial: " << failure << "; corpus retained at "
            << partial_path.string() << "\n";
        return false;
    }
    write_artifact(config.corpus, buf.str());
    update_manifest(config, "session", {config.plan}, {config.corpus},
                    {{"backend", config.backend},
                     {"seed", config.seed},
                     {"rounds", plan.rounds},
                     {"increment_limit", plan.increment_limit},
                     {"sessions", jobs.size()},
                     {"concurrency", config.concurrency}});
    log << "session stage: " << records.size() << " records from " << jobs.size()
        << " sessions -> " << config.corpus.string() << "\n";
    return true;
}

void run_embed_stage(const PipelineConfig& config, std::ostream& log) {
    require_input(config.corpus, "corpus");
    if (config.cache.empty()) throw ValidationError("no cache path configured");

    const auto records = load_corpus_file(config.corpus.string());
    auto provider = make_embed_provider(config);
    EmbeddingCache cache(config.cache);
    const std::size_t before = cache.size();
    embed_corpus(records, *provider, cache);
    update_manifest(config, "embed", {config.corpus}, {config.cache},
                    {{"provider", provider->provider_id()},
                     {"model", provider->model_id()},
                     {"dim", provider->dimension()}});
    log << "embed stage: " << records.size() << " records, " << (cache.size() - before)
        << " new vectors -> " << config.cache.string() << "\n";
}

void run_cluster_stage(const PipelineConfig& config, std::ostream& log) {
    require_input(config.corpus, "corpus");
    require_input(config.cache, "embedding cache");
    if (config.clusterings.empty()) throw ValidationError("no clusterings path configured");

    const auto records = load_corpus_file(config.corpus.string());
    if (records.empty()) throw ValidationError("corpus is empty");
    EmbeddingCache cache(config.cache);

    // pooled sample per group, in corpus file order
    std::map<Group, std::vector<std::string>> group_ids;
    for (const auto& r : records) group_ids[r.condition.group].push_back(r.id);

    std::map<Group, GroupClusterings> groups;
    std::map<Group, std::vector<std::string>> warnings;
    for (const auto& [group, ids] : group_ids) {
        std::vector<Vec> vectors;
        vectors.reserve(ids.size());
        for (const auto& id : ids) {
            const Vec* v = cache.find(id);
            if (!v) {
                throw ValidationError("missing input: no cached embedding for record \"" + id +
                                      "\"; run the embed stage first");
            }
            vectors.push_back(*v);
        }
        SweepOptions opts = config.sweep;
        opts.threads = config.concurrency;
        SweepOutcome outcome = sweep_k(vectors, opts);
        for (const auto& w : outcome.warnings) {
            log << "cluster stage [" << to_string(group) << "]: warning: " << w << "\n";
        }
        warnings[group] = outcome.warnings;
        groups.emplace(group, GroupClusterings{ids, std::move(outcome.runs)});
    }

    write_artifact(config.clusterings, clusterings_to_json(groups, warnings, config.sweep));
    update_manifest(config, "cluster", {config.corpus, config.cache}, {config.clusterings},
                    {{"k_min", config.sweep.k_min},
                     {"k_max", config.sweep.k_max},
                     {"restarts", config.sweep.restarts},
                     {"top", config.sweep.top},
                     {"seed", config.sweep.seed},
                     {"tol", config.sweep.lloyd.tol},
                     {"max_iter", config.sweep.lloyd.max_iter}});
    log << "cluster stage: " << groups.size() << " group(s) -> " << config.clusterings.string()
        << "\n";
}

void run_diversity_stage(const PipelineConfig& config, std::ostream& log) {
    require_input(config.corpus, "corpus");
    require_input(config.clusterings, "clusterings");
    if (config.report_json.empty()) throw ValidationError("no report path configured");

    const auto records = load_corpus_file(config.corpus.string());
    const CorpusIndex index = partition(records);

    std::ifstream in(config.clusterings);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto groups = clusterings_from_json(buf.str());

    const DiversityReport report = diversity_report(index, groups, config.diversity);
    write_artifact(config.report_json, report_to_json(report));
    update_manifest(config, "diversity", {config.corpus, config.clusterings},
                    {config.report_json},
                    {{"base", config.diversity.base},
                     {"granularity", to_string(config.diversity.granularity)},
                     {"per_topic", config.diversity.per_topic}});
    log << "diversity stage: " << report.groups.size() << " group(s) -> "
        << config.report_json.string() << "\n";
}

void run_report_stage(const PipelineConfig& config, std::ostream& log) {
    require_input(config.report_json, "diversity report");
    if (config.report_out.empty()) throw ValidationError("no rendered-report path configured");

    std::ifstream in(config.report_json);
    std::ostringstream buf;
    buf << in.rdbuf();
    const DiversityReport report = report_from_json(buf.str());

    std::string rendered;
    if (config.report_format == "md") {
        rendered = render_markdown(report);
    } else if (config.report_format == "csv") {
        rendered = render_csv(report);
    } else {
        rendered = report_to_json(report);
    }
    write_artifact(config.report_out, rendered);
    update_manifest(config, "report", {config.report_json}, {config.report_out},
                    {{"format", config.report_format}});
    log << "report stage: " << config.report_format << " -> " << config.report_out.string()
        << "\n";
}

int run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages, std::ostream& log) {
    try {
        config.validate();
        if (stages.count(Stage::session)) {
            if (!run_session_stage(config, log)) return kExitPartial;
        }
        if (stages.count(Stage::embed)) run_embed_stage(config, log);
        if (stages.count(Stage::cluster)) run_cluster_stage(config, log);
        if (stages.count(Stage::diversity)) run_diversity_stage(config, log);
        if (stages.count(Stage::report)) run_report_stage(config, log);
    } catch (const ProviderError& e) {
        log << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const ValidationError& e) {
        log << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

std::string clusterings_to_json(const std::map<Group, GroupClusterings>& groups,
                                const std::map<Group, std::vector<std::string>>& warnings,
                                const SweepOptions& opts) {
    json groups_json = json::object();
    for (const auto& [group, gc] : groups) {
        json runs = json::array();
        for (const auto& run : gc.runs) {
            runs.push_back({{"k", run.k},
                            {"seed", run.seed},
                            {"iterations", run.iterations},
                            {"converged", run.converged},
                            {"mean_silhouette", run.mean_silhouette},
                            {"labels", run.labels},
                            {"centroids", run.centroids}});
        }
        json entry = {{"sample_ids", gc.sample_ids}, {"runs", runs}};
        auto it = warnings.find(group);
        entry["warnings"] = it == warnings.end() ? std::vector<std::string>{} : it->second;
        groups_json[to_string(group)] = std::move(entry);
    }
    json doc = {{"params",
                 {{"k_min", opts.k_min},
                  {"k_max", opts.k_max},
                  {"restarts", opts.restarts},
                  {"seed", opts.seed},
                  {"top", opts.top}}},
                {"groups", groups_json}};
    return doc.dump(2);
}

std::map<Group, GroupClusterings> clusterings_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed clusterings file: ") + e.what());
    }
    std::map<Group, GroupClusterings> out;
    try {
        for (const auto& [name, entry] : doc.at("groups").items()) {
            GroupClusterings gc;
            gc.sample_ids = entry.at("sample_ids").get<std::vector<std::string>>();
            for (const auto& r : entry.at("runs")) {
                ClusteringResult run;
                run.k = r.at("k").get<int>();
                run.seed = r.at("seed").get<std::uint64_t>();
                run.iterations = r.at("iterations").get<int>();
                run.converged = r.at("converged").get<bool>();
                run.mean_silhouette = r.at("mean_silhouette").get<double>();
                run.labels = r.at("labels").get<std::vector<int>>();
                run.centroids = r.at("centroids").get<std::vector<Vec>>();
                gc.runs.push_back(std::move(run));
            }
            out.emplace(group_from_string(name), std::move(gc));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad clusterings file: ") + e.what());
    }
    return out;
}

}  // namespace cw
