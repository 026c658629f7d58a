#pragma once

#include "qualit/corpus.hpp"
#include "qualit/keyphrase.hpp"
#include "qualit/providers.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qualit::clustering {

// Row-major n x d matrix of points.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t dims) : dims_(dims) {}
    // Throws InputError when rows differ in length.
    static PointSet from_rows(const std::vector<std::vector<double>>& rows);
    static PointSet from_phrases(std::span<const keyphrase::KeyPhrase> phrases);

    void push_back(std::span<const double> row);
    std::size_t size() const { return dims_ == 0 ? 0 : data_.size() / dims_; }
    std::size_t dims() const { return dims_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dims_, dims_}; }
    PointSet subset(std::span<const std::size_t> indices) const;
    PointSet scaled(double factor) const;

private:
    std::size_t dims_ = 0;
    std::vector<double> data_;
};

struct KMeansOptions {
    int max_iterations = 300;
};

struct KMeansResult {
    std::vector<int> assignments;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    int iterations_run = 0;
    std::uint64_t seed = 0;
    // Inertia after each iteration's centroid update.
    std::vector<double> inertia_trace;
};

// Lloyd's algorithm with k-means++ seeding from mt19937_64(seed). Converges
// when no assignment changes, or after max_iterations. A point only moves on
// a strictly shorter distance. Empty clusters take the point farthest from
// its centroid (among clusters of size > 1), so every cluster is non-empty.
KMeansResult kmeans(const PointSet& points, int k, std::uint64_t seed, const KMeansOptions& opts = {});

// Symmetric Euclidean distance matrix, computed once and reused across k.
class DistanceMatrix {
public:
    explicit DistanceMatrix(const PointSet& points);
    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

struct SilhouetteStats {
    std::vector<double> per_point;
    double mean = 0.0;
};

// s(i) = (b - a) / max(a, b) for points in clusters of size > 1, else 0.
// 0/0 (a == b == 0) is defined as 0. A single-cluster labelling gives all 0.
SilhouetteStats silhouette(const PointSet& points, std::span<const int> assignments);
SilhouetteStats silhouette(const DistanceMatrix& distances, std::span<const int> assignments);

struct KDiagnostic {
    int k;
    double mean_silhouette;
};

struct SelectionResult {
    int k = 0;
    std::vector<KDiagnostic> diagnostics;
    KMeansResult best;
};

// min(ceiling, floor(sqrt(n / 2)), n - 1), never below 2.
int default_k_max(std::size_t n, int ceiling = 50);

// Sweeps k in [k_min, k_max] and keeps the best mean silhouette; ties go to
// the smaller k. k_max defaults to default_k_max(n).
SelectionResult select_k(const PointSet& points, int k_min, std::optional<int> k_max, std::uint64_t seed,
                         int workers = 1, int k_ceiling = 50);

// ---------------------------------------------------------------------------
// Topic representation

// Class-based TF-IDF: tf(token, cluster) * ln(1 + K / clusters containing
// token), with tokens taken from the member phrases. Ties by token. Lists
// shorter than n are padded from the most frequent member-document tokens.
// Returns one list per cluster.
std::vector<std::vector<std::string>> top_words(
    const std::vector<std::vector<std::string>>& cluster_phrases,
    const std::vector<std::vector<std::span<const std::string>>>& member_doc_tokens,
    const corpus::Preprocessor& tokenizer, std::size_t n = 10);

inline constexpr const char* kLabelPromptVersion = "label-v1";
inline constexpr std::size_t kMaxLabelChars = 60;

struct TopicLabel {
    std::string text;
    bool fallback = false;
};

providers::ChatRequest label_request(std::span<const std::string> top_words,
                                     std::span<const std::string> sample_phrases);

// Single-line label from the provider; on provider failure (or an empty
// reply) the top three words joined by "/" with fallback set.
TopicLabel label_topic(std::span<const std::string> top_words, std::span<const std::string> sample_phrases,
                       providers::ChatProvider& provider);

std::string fallback_label(std::span<const std::string> top_words);

// ---------------------------------------------------------------------------
// Two-level hierarchy

enum class SelectionMode { automatic, fixed };

struct HierarchyConfig {
    SelectionMode mode = SelectionMode::automatic;
    std::optional<int> fixed_k;
    std::uint64_t seed = 42;
    int k_ceiling = 50;
    int sub_min_members = 6;
    std::size_t top_n = 10;
    int workers = 1;
};

struct SubTopic {
    std::string id;
    TopicLabel label;
    std::vector<std::string> top_words;
    std::vector<std::size_t> member_phrase_ids;
};

struct MainTopic {
    std::string id;
    TopicLabel label;
    std::vector<std::string> top_words;
    std::vector<std::size_t> member_phrase_ids;
    std::vector<SubTopic> sub_topics;
    // Empty when the cluster was too small for a second-level sweep.
    std::vector<KDiagnostic> sub_diagnostics;
};

struct TopicHierarchy {
    int k = 0;
    SelectionMode mode = SelectionMode::automatic;
    std::vector<KDiagnostic> diagnostics;  // empty in fixed mode
    double mean_silhouette = 0.0;          // of the level-1 partition
    std::vector<MainTopic> main_topics;
};

// Member phrase ids index into `phrases`. Documents are looked up by doc_id
// for top-word padding.
TopicHierarchy cluster_hierarchy(std::span<const keyphrase::KeyPhrase> phrases,
                                 std::span<const corpus::TokenizedDocument> docs,
                                 const corpus::Preprocessor& tokenizer, const HierarchyConfig& cfg,
                                 providers::ChatProvider& labeler);

}  // namespace qualit::clustering
