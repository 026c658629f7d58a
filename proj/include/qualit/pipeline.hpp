#pragma once

#include "qualit/clustering.hpp"
#include "qualit/corpus.hpp"
#include "qualit/eval.hpp"
#include "qualit/keyphrase.hpp"
#include "qualit/providers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qualit::pipeline {

struct CorpusSpec {
    std::string kind;  // "20ng" | "jsonl"
    std::string path;
};

struct PreprocessSpec {
    corpus::PreprocessOptions options;
    std::optional<std::string> stopwords_path;
    std::optional<std::string> lemma_dictionary_path;
};

struct ClusteringSpec {
    std::string mode = "auto";  // "auto" | "fixed"
    std::optional<int> k;
    std::vector<int> k_sweep;
    std::uint64_t seed = 42;
    int k_ceiling = 50;
    int sub_min_members = 6;

    // k values to run in fixed mode: k_sweep if given, else {k}.
    std::vector<int> fixed_ks() const;
};

inline const std::vector<std::string> kReportFormats = {"json", "csv", "md"};

// A single JSON document; unknown keys anywhere are rejected.
struct RunConfig {
    CorpusSpec corpus;
    PreprocessSpec preprocess;
    providers::ProviderSpec provider;
    providers::ProviderSpec embedder;
    keyphrase::ExtractionConfig extraction;
    ClusteringSpec clustering;
    bool eval_enabled = true;
    std::vector<std::string> report_formats = kReportFormats;
    int concurrency = 8;

    // Throws ConfigError with the offending key path.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    // Every field, defaults included.
    nlohmann::json to_json() const;
    void validate() const;
};

struct RunOptions {
    std::filesystem::path runs_root = "runs";
    // Relative corpus/stopword/lemma paths resolve against this directory.
    std::filesystem::path config_dir = ".";
    std::optional<std::filesystem::path> cache_dir = std::filesystem::path(".qualit-cache");
    std::optional<std::uint64_t> seed_override;
    std::vector<std::string> report_formats_override;
    bool dump_phrases = false;
    bool dump_hierarchy = false;
    providers::ProviderEnvironment env;
    // Providers to use instead of building them from the config (tests).
    std::shared_ptr<providers::ChatProvider> chat_override;
    std::shared_ptr<providers::Embedder> embedder_override;
};

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct RunOutcome {
    int exit_code = kExitOk;
    std::filesystem::path run_dir;  // empty when the run never started
    std::string error;
    std::string failed_stage;
};

RunOutcome run_pipeline(const RunConfig& config, const RunOptions& options);

// Creates <root>/<UTC timestamp>-<seed>[-n]; never reuses an existing path.
std::filesystem::path create_run_dir(const std::filesystem::path& root, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reports

struct TopicsAtK {
    int k = 0;
    clustering::TopicHierarchy hierarchy;
};

nlohmann::json report_json(const eval::EvalReport& report, const std::vector<TopicsAtK>& topics,
                           const nlohmann::json& metadata);
// method,k,topic_coherence,topic_diversity with percentages to one decimal
// and a trailing "Avg" row per method.
std::string report_csv(const eval::EvalReport& report);
std::string report_markdown(const eval::EvalReport& report);

nlohmann::json hierarchy_json(std::span<const keyphrase::KeyPhrase> phrases, const std::vector<TopicsAtK>& runs);

// Topic word lists of the main topics, as scored by TC/TD.
std::vector<eval::TopicWordSet> main_topic_words(const clustering::TopicHierarchy& h);

// Markdown table of agreement_at_least for m = 2..evaluators.
std::string agreement_table(const std::vector<std::vector<std::string>>& labels);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qualit::pipeline
