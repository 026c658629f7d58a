#include "qualit/error.hpp"
#include "qualit/eval.hpp"
#include "qualit/log.hpp"
#include "qualit/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace qualit;

namespace {

int cmd_run(const std::string& config_path, pipeline::RunOptions opts) {
    pipeline::RunConfig config;
    try {
        config = pipeline::RunConfig::load(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitUsage;
    }
    opts.config_dir = fs::path(config_path).parent_path();
    if (opts.config_dir.empty()) opts.config_dir = ".";
    opts.env = providers::ProviderEnvironment::from_env();
    const auto outcome = pipeline::run_pipeline(config, opts);
    if (outcome.exit_code != pipeline::kExitOk) {
        std::cerr << "error: " << outcome.error;
        if (!outcome.failed_stage.empty()) std::cerr << " (stage: " << outcome.failed_stage << ")";
        std::cerr << "\n";
    }
    if (!outcome.run_dir.empty()) std::cout << outcome.run_dir.string() << "\n";
    return outcome.exit_code;
}

int cmd_score(const std::string& topics_path, const std::string& corpus_path, const std::string& method,
              const std::string& normalize, const std::vector<std::string>& formats, const std::string& out_dir) {
    try {
        const auto topics = eval::load_topics_jsonl(topics_path);
        const auto loaded = corpus::load_any(corpus_path);
        corpus::PreprocessOptions opts;
        opts.normalize_mode = corpus::parse_normalize_mode(normalize);
        const corpus::Preprocessor pre(opts);
        std::vector<corpus::TokenizedDocument> tokenized;
        tokenized.reserve(loaded.documents.size());
        for (const auto& d : loaded.documents) tokenized.push_back(pre.preprocess(d));
        const auto stats = eval::CorpusStats::build(tokenized);
        eval::EvalReport report;
        report.rows.push_back(eval::ReportRow{method, static_cast<int>(topics.size()),
                                              eval::topic_coherence(topics, stats), eval::topic_diversity(topics)});
        std::cout << pipeline::report_markdown(report);
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            const nlohmann::json metadata = {{"npmi_reference", "supplied corpus, boolean document co-occurrence"},
                                             {"normalize_mode", normalize},
                                             {"topics_file", topics_path},
                                             {"documents", loaded.documents.size()}};
            for (const auto& fmt : formats) {
                if (fmt == "json") {
                    pipeline::write_file(fs::path(out_dir) / "report.json",
                                         pipeline::report_json(report, {}, metadata).dump(2) + "\n");
                } else if (fmt == "csv") {
                    pipeline::write_file(fs::path(out_dir) / "report.csv", pipeline::report_csv(report));
                } else if (fmt == "md") {
                    pipeline::write_file(fs::path(out_dir) / "report.md", pipeline::report_markdown(report));
                }
            }
        }
        return pipeline::kExitOk;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitFailure;
    }
}

int cmd_agreement(const std::string& csv_path, int m, bool header) {
    try {
        const auto labels = eval::load_agreement_csv(csv_path, header);
        if (m == 0) {
            std::cout << pipeline::agreement_table(labels);
        } else {
            std::cout << "At least " << m << " evaluators agreed\n"
                      << eval::format_percent(eval::agreement_at_least(labels, m)) << "%\n";
        }
        return pipeline::kExitOk;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Key-phrase topic modeling with LLM extraction, hallucination filtering and two-level clustering"};
    app.require_subcommand(1);

    pipeline::RunOptions run_opts;
    std::string config_path;
    std::string cache_dir = ".qualit-cache";
    bool no_cache = false;
    std::uint64_t seed = 0;
    std::string runs_dir = "runs";
    auto* run = app.add_subcommand("run", "Run the full pipeline from a JSON config");
    run->add_option("config", config_path, "Run configuration (JSON)")->required();
    run->add_option("--cache-dir", cache_dir, "Response cache directory")->capture_default_str();
    run->add_flag("--no-cache", no_cache, "Disable the response cache");
    auto* seed_opt = run->add_option("--seed", seed, "Override clustering.seed");
    run->add_flag("--dump-phrases", run_opts.dump_phrases, "Write phrases.jsonl into the run directory");
    run->add_flag("--dump-hierarchy", run_opts.dump_hierarchy, "Write hierarchy.json into the run directory");
    run->add_option("--report-format", run_opts.report_formats_override, "json|csv|md (repeatable)")
        ->check(CLI::IsMember(pipeline::kReportFormats));
    run->add_option("--runs-dir", runs_dir, "Parent directory for run directories")->capture_default_str();

    std::string topics_path, corpus_path, method = "external", out_dir, normalize = "none";
    std::vector<std::string> score_formats = {"json", "csv", "md"};
    auto* score = app.add_subcommand("score", "Score topic word lists with TC/TD against a corpus");
    score->add_option("--topics", topics_path, "Topic JSONL file")->required();
    score->add_option("--corpus", corpus_path, "Corpus: 20NG-style directory or JSONL file")->required();
    score->add_option("--method", method, "Method name for the report rows")->capture_default_str();
    score->add_option("--normalize", normalize, "Corpus token normalization: none|stem")
        ->check(CLI::IsMember({"none", "stem"}))
        ->capture_default_str();
    score->add_option("--out", out_dir, "Directory for report files");
    score->add_option("--report-format", score_formats, "json|csv|md (repeatable)")
        ->check(CLI::IsMember(pipeline::kReportFormats));

    std::string csv_path;
    int m = 0;
    bool header = false;
    auto* agreement = app.add_subcommand("agreement", "Evaluator agreement percentages from a label CSV");
    agreement->add_option("--csv", csv_path, "One row per topic, one column per evaluator")->required();
    agreement->add_option("--m", m, "Report only 'at least m evaluators agreed'");
    agreement->add_flag("--header", header, "Skip the first CSV line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pipeline::kExitUsage;
    }

    try {
        if (*run) {
            run_opts.runs_root = runs_dir;
            run_opts.cache_dir = no_cache ? std::nullopt : std::optional<fs::path>(cache_dir);
            if (*seed_opt) run_opts.seed_override = seed;
            return cmd_run(config_path, run_opts);
        }
        if (*score) return cmd_score(topics_path, corpus_path, method, normalize, score_formats, out_dir);
        if (*agreement) {
            if (agreement->count("--m") && m == 0) {
                std::cerr << "error: m must be between 2 and the evaluator count\n";
                return pipeline::kExitUsage;
            }
            return cmd_agreement(csv_path, m, header);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitFailure;
    }
    return pipeline::kExitUsage;
}
