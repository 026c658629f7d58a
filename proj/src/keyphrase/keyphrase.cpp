#include "qualit/keyphrase.hpp"

#include "qualit/error.hpp"
#include "qualit/kernels.hpp"
#include "qualit/log.hpp"
#include "qualit/parallel.hpp"
#include "qualit/unicode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace qualit::keyphrase {

void ExtractionConfig::validate() const {
    if (max_phrases_per_doc < 1) throw ConfigError("max_phrases_per_doc must be >= 1");
    if (!(coherence_threshold >= -1.0 && coherence_threshold <= 1.0)) {
        throw ConfigError("coherence_threshold must be in [-1, 1]");
    }
    if (!(coherence_percentile >= 0.0 && coherence_percentile <= 100.0)) {
        throw ConfigError("coherence_percentile must be in [0, 100]");
    }
}

providers::ChatRequest extraction_request(const corpus::TokenizedDocument& doc, std::string_view raw_text,
                                          const ExtractionConfig& cfg) {
    if (cfg.prompt_version != kExtractionPromptVersion) {
        throw ConfigError("unsupported extraction prompt version: " + cfg.prompt_version);
    }
    std::string tokens;
    for (const auto& t : doc.tokens) {
        if (!tokens.empty()) tokens += ' ';
        tokens += t;
    }
    providers::ChatRequest req;
    req.system_prompt =
        "You are a careful analyst. You read one document at a time and list the key phrases that "
        "represent what the document is about.";
    req.user_prompt = "Extract up to " + std::to_string(cfg.max_phrases_per_doc) +
                      " key phrases that represent the subjects of the document below. A document can "
                      "cover more than one subject. Reply with one phrase per line, each line starting "
                      "with \"- \", and nothing else.\n\nDOCUMENT:\n" +
                      std::string(raw_text) + "\n\nTOKENS:\n" + tokens + "\n";
    return req;
}

std::vector<std::string> parse_phrase_lines(std::string_view reply, std::vector<std::string>& warnings) {
    std::vector<std::string> phrases;
    std::unordered_set<std::string> seen;
    std::istringstream in{std::string(reply)};
    std::string line;
    int unparseable = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.starts_with("- ")) {
            if (line.find_first_not_of(" \t") != std::string::npos) ++unparseable;
            continue;
        }
        std::string phrase = unicode::normalize_phrase(std::string_view(line).substr(2));
        if (phrase.empty()) {
            warnings.push_back("empty phrase line dropped");
            continue;
        }
        if (unicode::length(phrase) > kMaxPhraseChars) {
            warnings.push_back("phrase longer than 80 characters dropped");
            continue;
        }
        if (seen.insert(phrase).second) phrases.push_back(std::move(phrase));
    }
    if (unparseable > 0) warnings.push_back(std::to_string(unparseable) + " unparseable line(s) dropped");
    return phrases;
}

Extraction extract_keyphrases(const corpus::TokenizedDocument& doc, std::string_view raw_text,
                              const ExtractionConfig& cfg, providers::ChatProvider& chat) {
    if (doc.tokens.empty()) throw InputError("document " + doc.doc_id + " has no tokens");
    Extraction out{doc.doc_id, {}, {}};
    const std::string reply = chat.complete(extraction_request(doc, raw_text, cfg));
    out.phrases = parse_phrase_lines(reply, out.warnings);
    if (out.phrases.size() > static_cast<std::size_t>(cfg.max_phrases_per_doc)) {
        out.phrases.resize(cfg.max_phrases_per_doc);
    }
    if (out.phrases.empty()) out.warnings.push_back("no-phrases");
    for (const auto& w : out.warnings) logger()->warn("{}: {}", doc.doc_id, w);
    return out;
}

double coherence_score(const EmbeddingVector& doc_vec, const EmbeddingVector& phrase_vec) {
    if (doc_vec.dims() != phrase_vec.dims()) {
        throw InputError("embedding dimension mismatch: " + std::to_string(doc_vec.dims()) + " vs " +
                         std::to_string(phrase_vec.dims()));
    }
    return std::clamp(kernels::dot(doc_vec.values(), phrase_vec.values()), -1.0, 1.0);
}

FilterResult filter_hallucinations(std::vector<KeyPhrase> phrases, double threshold) {
    FilterResult out;
    for (auto& p : phrases) {
        (p.coherence < threshold ? out.removed : out.kept).push_back(std::move(p));
    }
    return out;
}

double percentile_threshold(std::span<const KeyPhrase> phrases, double percentile) {
    if (phrases.empty()) return -1.0;
    std::vector<double> scores;
    scores.reserve(phrases.size());
    for (const auto& p : phrases) scores.push_back(p.coherence);
    std::sort(scores.begin(), scores.end());
    const auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(scores.size())));
    return rank == 0 ? scores.front() : scores[rank - 1];
}

std::vector<KeyPhrase> score_phrases(const Extraction& extraction, std::string_view raw_text,
                                     providers::Embedder& embedder) {
    std::vector<KeyPhrase> out;
    if (extraction.phrases.empty()) return out;
    const EmbeddingVector doc_vec = embedder.embed(raw_text);
    for (const auto& text : extraction.phrases) {
        EmbeddingVector v = embedder.embed(text);
        const double c = coherence_score(doc_vec, v);
        out.push_back(KeyPhrase{extraction.doc_id, text, std::move(v), c});
    }
    return out;
}

std::vector<DocumentPhrases> extract_corpus(std::span<const corpus::Document> docs,
                                            std::span<const corpus::TokenizedDocument> tokenized,
                                            const ExtractionConfig& cfg, providers::ChatProvider& chat,
                                            providers::Embedder& embedder, int workers) {
    if (docs.size() != tokenized.size()) throw InputError("documents and token lists differ in length");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!tokenized[i].tokens.empty()) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return docs[a].id < docs[b].id; });
    return parallel_map(order.size(), workers, [&](std::size_t k) {
        const std::size_t i = order[k];
        DocumentPhrases dp;
        dp.extraction = extract_keyphrases(tokenized[i], docs[i].text, cfg, chat);
        dp.scored = score_phrases(dp.extraction, docs[i].text, embedder);
        return dp;
    });
}

}  // namespace qualit::keyphrase
