#pragma once

#include "qualit/corpus.hpp"
#include "qualit/embedding.hpp"
#include "qualit/providers.hpp"

#include <span>
#include <string>
#include <vector>

namespace qualit::keyphrase {

inline constexpr std::size_t kMaxPhraseChars = 80;
inline constexpr const char* kExtractionPromptVersion = "extract-v1";

struct KeyPhrase {
    std::string doc_id;
    std::string text;  // lowercased, whitespace-normalized
    EmbeddingVector embedding;
    double coherence = 0.0;
};

enum class ThresholdMode { absolute, percentile };

struct ExtractionConfig {
    int max_phrases_per_doc = 5;
    double coherence_threshold = 0.10;
    std::string prompt_version = kExtractionPromptVersion;
    ThresholdMode threshold_mode = ThresholdMode::absolute;
    // Used only in percentile mode: phrases scoring strictly below the
    // nearest-rank value at this percentile are removed.
    double coherence_percentile = 10.0;

    void validate() const;
};

struct Extraction {
    std::string doc_id;
    std::vector<std::string> phrases;
    std::vector<std::string> warnings;
    bool no_phrases() const { return phrases.empty(); }
};

providers::ChatRequest extraction_request(const corpus::TokenizedDocument& doc, std::string_view raw_text,
                                          const ExtractionConfig& cfg);

// Keeps "- <phrase>" lines; everything else non-blank is reported in
// `warnings`. Phrases come back normalized and deduplicated, first wins.
std::vector<std::string> parse_phrase_lines(std::string_view reply, std::vector<std::string>& warnings);

// Requires at least one token. An empty result flags the document as
// "no-phrases"; it is not an error.
Extraction extract_keyphrases(const corpus::TokenizedDocument& doc, std::string_view raw_text,
                              const ExtractionConfig& cfg, providers::ChatProvider& chat);

// Cosine similarity of two unit vectors, clamped to [-1, 1].
double coherence_score(const EmbeddingVector& doc_vec, const EmbeddingVector& phrase_vec);

struct FilterResult {
    std::vector<KeyPhrase> kept;
    std::vector<KeyPhrase> removed;
};

// Removes phrases scoring strictly below `threshold`; order is preserved.
FilterResult filter_hallucinations(std::vector<KeyPhrase> phrases, double threshold);

double percentile_threshold(std::span<const KeyPhrase> phrases, double percentile);

// Embeds the raw document and every phrase, and scores each phrase.
std::vector<KeyPhrase> score_phrases(const Extraction& extraction, std::string_view raw_text,
                                     providers::Embedder& embedder);

struct DocumentPhrases {
    Extraction extraction;
    std::vector<KeyPhrase> scored;
};

// Extract + score for every document with at least one token, `workers`
// documents at a time. Output is sorted by doc_id.
std::vector<DocumentPhrases> extract_corpus(std::span<const corpus::Document> docs,
                                            std::span<const corpus::TokenizedDocument> tokenized,
                                            const ExtractionConfig& cfg, providers::ChatProvider& chat,
                                            providers::Embedder& embedder, int workers);

}  // namespace qualit::keyphrase
