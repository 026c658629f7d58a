#pragma once

#include "qualit/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qualit::eval {

// Boolean document-level occurrence counts. Postings are kept per token and
// expanded to bitsets only for the words being scored, so memory stays
// proportional to the corpus rather than vocabulary x documents.
class CorpusStats {
public:
    // Throws InputError when every document is empty.
    static CorpusStats build(std::span<const corpus::TokenizedDocument> docs);

    std::size_t doc_count() const { return doc_count_; }
    std::size_t doc_freq(std::string_view token) const;
    // Documents containing both tokens; symmetric. pair_doc_freq(x, x) == df(x).
    std::size_t pair_doc_freq(std::string_view x, std::string_view y) const;
    std::size_t vocabulary_size() const { return postings_.size(); }

    // One bit per document; all zero for unseen tokens.
    std::vector<std::uint64_t> bitset(std::string_view token) const;

    // Appends `other`'s documents after this one's. Merging shards in any
    // grouping gives the same counts as building over the concatenation.
    void merge(const CorpusStats& other);

private:
    std::size_t doc_count_ = 0;
    std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;  // ascending doc indices
};

inline constexpr double kNpmiEpsilon = 1e-12;

// ln(p(x,y) / (p(x) p(y))) / -ln(p(x,y) + epsilon), with p(x,y) = 0 -> -1 and
// p(x,y) = 1 -> 1. Clamped to [-1, 1].
double npmi(std::string_view x, std::string_view y, const CorpusStats& stats, double epsilon = kNpmiEpsilon);

// Same formula from raw document counts.
double npmi_from_counts(std::size_t df_x, std::size_t df_y, std::size_t df_xy, std::size_t n,
                        double epsilon = kNpmiEpsilon);

struct TopicWordSet {
    std::string topic_id;
    std::vector<std::string> words;
};

// Mean NPMI over all unordered word pairs, per topic. Throws InputError
// naming the topic when it has fewer than two words.
std::vector<double> per_topic_coherence(std::span<const TopicWordSet> topics, const CorpusStats& stats);
// Mean of per_topic_coherence.
double topic_coherence(std::span<const TopicWordSet> topics, const CorpusStats& stats);

// Distinct words across all topics / total list length.
double topic_diversity(std::span<const TopicWordSet> topics);

// Fraction of rows where some category was chosen by at least m evaluators.
// Empty cells count as no choice.
double agreement_at_least(const std::vector<std::vector<std::string>>& labels, int m);

// {"topic_id": "...", "words": [...]} per line.
std::vector<TopicWordSet> load_topics_jsonl(const std::filesystem::path& path);

// One row per topic, one column per evaluator. `skip_header` drops line 1.
std::vector<std::vector<std::string>> load_agreement_csv(const std::filesystem::path& path,
                                                         bool skip_header = false);

struct ReportRow {
    std::string method;
    int k = 0;
    double tc = 0.0;
    double td = 0.0;
};

struct MethodAverage {
    std::string method;
    double tc = 0.0;
    double td = 0.0;
};

struct EvalReport {
    std::vector<ReportRow> rows;
    // Arithmetic means of each method's rows, in first-appearance order.
    std::vector<MethodAverage> averages() const;
};

// 0.7 -> "70.0"
std::string format_percent(double fraction);

}  // namespace qualit::eval
