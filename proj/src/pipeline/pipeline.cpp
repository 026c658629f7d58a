#include "qualit/error.hpp"
#include "qualit/kernels.hpp"
#include "qualit/log.hpp"
#include "qualit/parallel.hpp"
#include "qualit/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace qualit::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path create_run_dir(const fs::path& root, std::uint64_t seed) {
    fs::create_directories(root);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream name;
    name << std::put_time(&utc, "%Y%m%dT%H%M%SZ") << '-' << seed;
    fs::path dir = root / name.str();
    for (int suffix = 1; !fs::create_directory(dir); ++suffix) {
        dir = root / (name.str() + "-" + std::to_string(suffix));
    }
    return dir;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

class StageClock {
public:
    void start(std::string stage) {
        stage_ = std::move(stage);
        begin_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin_).count();
        timings_[stage_] = ms;
    }
    const std::string& stage() const { return stage_; }
    const json& timings() const { return timings_; }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point begin_;
    json timings_ = json::object();
};

}  // namespace

RunOutcome run_pipeline(const RunConfig& base_config, const RunOptions& options) {
    RunConfig config = base_config;
    if (options.seed_override) config.clustering.seed = *options.seed_override;
    if (!options.report_formats_override.empty()) config.report_formats = options.report_formats_override;
    try {
        config.validate();
    } catch (const ConfigError& e) {
        return RunOutcome{kExitUsage, {}, e.what(), "config"};
    }

    // Usage errors are reported before a run directory exists.
    const fs::path corpus_path = resolve(options.config_dir, config.corpus.path);
    std::error_code ec;
    if (!fs::exists(corpus_path, ec)) {
        return RunOutcome{kExitUsage, {}, "corpus path does not exist: " + corpus_path.string(), "config"};
    }
    if (config.corpus.kind == "20ng" && !fs::is_directory(corpus_path, ec)) {
        return RunOutcome{kExitUsage, {}, "20ng corpus path is not a directory: " + corpus_path.string(), "config"};
    }
    if (config.corpus.kind == "jsonl" && fs::is_directory(corpus_path, ec)) {
        return RunOutcome{kExitUsage, {}, "jsonl corpus path is a directory: " + corpus_path.string(), "config"};
    }

    std::shared_ptr<providers::ChatProvider> chat = options.chat_override;
    std::shared_ptr<providers::Embedder> embedder = options.embedder_override;
    try {
        providers::ProviderOptions popts;
        popts.cache_dir = options.cache_dir;
        popts.max_in_flight = config.concurrency;
        if (!chat) chat = providers::make_chat_provider(config.provider, options.env, popts);
        if (!embedder) embedder = providers::make_embedder(config.embedder, options.env, popts);
    } catch (const ConfigError& e) {
        return RunOutcome{kExitUsage, {}, e.what(), "config"};
    }

    RunOutcome outcome;
    outcome.run_dir = create_run_dir(options.runs_root, config.clustering.seed);
    const fs::path& dir = outcome.run_dir;
    const int workers = config.concurrency;

    json manifest;
    manifest["config"] = config.to_json();
    manifest["prompt_versions"] = {{"extraction", config.extraction.prompt_version},
                                   {"labeling", clustering::kLabelPromptVersion}};
    manifest["providers"] = {{"chat", {{"kind", config.provider.kind}, {"id", chat->id()}, {"model", chat->model()}}},
                             {"embedder",
                              {{"kind", config.embedder.kind}, {"id", embedder->id()}, {"model", embedder->model()}}}};
    manifest["simd"] = kernels::isa_name(kernels::active().isa);
    manifest["interpretation"] = {
        {"cluster_count_selection",
         config.clustering.mode == "fixed"
             ? "evaluation mode: fixed k per sweep entry, silhouette selection bypassed at level 1"
             : "discovery mode: silhouette selection over k in [2, min(k_ceiling, floor(sqrt(n/2)), n-1)]"},
        {"npmi_reference", "full evaluated corpus, boolean document co-occurrence"},
        {"topic_count", "main topics only"},
        {"hallucination_threshold",
         config.extraction.threshold_mode == keyphrase::ThresholdMode::absolute
             ? "absolute coherence score, strictly-below removed"
             : "percentile of coherence scores, strictly-below removed"}};

    std::vector<std::string> outputs;
    json counts = json::object();
    StageClock clock;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        outputs.push_back(name);
    };

    try {
        clock.start("load");
        auto loaded = config.corpus.kind == "20ng" ? corpus::load_20newsgroups(corpus_path)
                                                   : corpus::LoadResult{corpus::load_jsonl(corpus_path), {}};
        counts["documents"] = loaded.documents.size();
        counts["files_skipped"] = loaded.warnings.size();
        clock.stop();

        clock.start("preprocess");
        corpus::Preprocessor pre(config.preprocess.options);
        if (config.preprocess.stopwords_path) pre.load_stopwords(resolve(options.config_dir, *config.preprocess.stopwords_path));
        if (config.preprocess.lemma_dictionary_path) {
            pre.load_lemma_dictionary(resolve(options.config_dir, *config.preprocess.lemma_dictionary_path));
        }
        const auto& docs = loaded.documents;
        auto tokenized = parallel_map(docs.size(), workers, [&](std::size_t i) { return pre.preprocess(docs[i]); });
        std::size_t with_tokens = 0;
        for (const auto& t : tokenized) with_tokens += t.tokens.empty() ? 0 : 1;
        counts["documents_with_tokens"] = with_tokens;
        clock.stop();

        clock.start("extract");
        auto per_doc = keyphrase::extract_corpus(docs, tokenized, config.extraction, *chat, *embedder, workers);
        std::vector<keyphrase::KeyPhrase> scored;
        std::size_t no_phrases = 0;
        for (auto& dp : per_doc) {
            if (dp.extraction.no_phrases()) ++no_phrases;
            for (auto& p : dp.scored) scored.push_back(std::move(p));
        }
        counts["documents_no_phrases"] = no_phrases;
        counts["phrases_extracted"] = scored.size();
        clock.stop();

        clock.start("filter");
        double threshold = config.extraction.coherence_threshold;
        if (config.extraction.threshold_mode == keyphrase::ThresholdMode::percentile) {
            threshold = keyphrase::percentile_threshold(scored, config.extraction.coherence_percentile);
        }
        if (options.dump_phrases) {
            std::string lines;
            for (const auto& p : scored) {
                lines += json{{"doc_id", p.doc_id}, {"phrase", p.text}, {"coherence", p.coherence},
                              {"kept", p.coherence >= threshold}}
                             .dump() +
                         "\n";
            }
            emit("phrases.jsonl", lines);
        }
        auto filtered = keyphrase::filter_hallucinations(std::move(scored), threshold);
        counts["phrases_kept"] = filtered.kept.size();
        counts["phrases_removed"] = filtered.removed.size();
        manifest["effective_coherence_threshold"] = threshold;
        clock.stop();

        clock.start("cluster");
        std::vector<TopicsAtK> runs;
        clustering::HierarchyConfig hcfg;
        hcfg.seed = config.clustering.seed;
        hcfg.k_ceiling = config.clustering.k_ceiling;
        hcfg.sub_min_members = config.clustering.sub_min_members;
        hcfg.workers = workers;
        if (config.clustering.mode == "fixed") {
            hcfg.mode = clustering::SelectionMode::fixed;
            for (int k : config.clustering.fixed_ks()) {
                hcfg.fixed_k = k;
                runs.push_back(TopicsAtK{k, clustering::cluster_hierarchy(filtered.kept, tokenized, pre, hcfg, *chat)});
            }
        } else {
            auto h = clustering::cluster_hierarchy(filtered.kept, tokenized, pre, hcfg, *chat);
            const int k = h.k;
            runs.push_back(TopicsAtK{k, std::move(h)});
        }
        if (options.dump_hierarchy) emit("hierarchy.json", hierarchy_json(filtered.kept, runs).dump(2) + "\n");
        clock.stop();

        eval::EvalReport report;
        if (config.eval_enabled) {
            clock.start("eval");
            const auto stats = eval::CorpusStats::build(tokenized);
            for (const auto& run : runs) {
                const auto words = main_topic_words(run.hierarchy);
                report.rows.push_back(
                    eval::ReportRow{"qualit", run.k, eval::topic_coherence(words, stats), eval::topic_diversity(words)});
            }
            clock.stop();
        }

        clock.start("report");
        const json metadata = {{"npmi_reference", "full evaluated corpus, boolean document co-occurrence"},
                               {"eval_enabled", config.eval_enabled},
                               {"documents", docs.size()}};
        for (const auto& fmt : config.report_formats) {
            if (fmt == "json") emit("report.json", report_json(report, runs, metadata).dump(2) + "\n");
            if (fmt == "csv") emit("report.csv", report_csv(report));
            if (fmt == "md") emit("report.md", report_markdown(report));
        }
        clock.stop();
        manifest["status"] = "ok";
        manifest["failed_stage"] = nullptr;
        manifest["error"] = nullptr;
    } catch (const std::exception& e) {
        clock.stop();
        outcome.exit_code = kExitFailure;
        outcome.error = e.what();
        outcome.failed_stage = clock.stage();
        manifest["status"] = "failed";
        manifest["failed_stage"] = clock.stage();
        manifest["error"] = e.what();
        logger()->error("stage {} failed: {}", clock.stage(), e.what());
    }

    manifest["counts"] = counts;
    try {
        write_file(dir / "timings.json", json{{"stage_ms", clock.timings()}}.dump(2) + "\n");
        outputs.push_back("timings.json");
        manifest["outputs"] = outputs;
        write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        outcome.exit_code = kExitFailure;
        outcome.error = e.what();
        outcome.failed_stage = "manifest";
    }
    return outcome;
}

}  // namespace qualit::pipeline
