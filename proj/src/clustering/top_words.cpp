#include "qualit/clustering.hpp"
#include "qualit/error.hpp"
#include "qualit/log.hpp"
#include "qualit/unicode.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace qualit::clustering {

namespace {

using Ranked = std::vector<std::pair<std::string, double>>;

// Score descending, then token ascending.
void rank(Ranked& items) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
}

std::string collapse_whitespace(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string word, out;
    while (in >> word) {
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

}  // namespace

std::vector<std::vector<std::string>> top_words(
    const std::vector<std::vector<std::string>>& cluster_phrases,
    const std::vector<std::vector<std::span<const std::string>>>& member_doc_tokens,
    const corpus::Preprocessor& tokenizer, std::size_t n) {
    const std::size_t clusters = cluster_phrases.size();
    std::vector<std::map<std::string, double>> tf(clusters);
    std::map<std::string, int> clusters_with;
    for (std::size_t c = 0; c < clusters; ++c) {
        for (const auto& phrase : cluster_phrases[c]) {
            for (const auto& tok : tokenizer.tokenize(phrase)) tf[c][tok] += 1.0;
        }
        for (const auto& [tok, _] : tf[c]) ++clusters_with[tok];
    }

    std::vector<std::vector<std::string>> out(clusters);
    const auto k = static_cast<double>(clusters);
    for (std::size_t c = 0; c < clusters; ++c) {
        Ranked scored;
        for (const auto& [tok, count] : tf[c]) {
            scored.emplace_back(tok, count * std::log(1.0 + k / clusters_with[tok]));
        }
        rank(scored);
        std::set<std::string> taken;
        for (const auto& [tok, _] : scored) {
            if (out[c].size() == n) break;
            out[c].push_back(tok);
            taken.insert(tok);
        }
        if (out[c].size() < n && c < member_doc_tokens.size()) {
            std::map<std::string, double> freq;
            for (const auto& doc : member_doc_tokens[c]) {
                for (const auto& tok : doc) freq[tok] += 1.0;
            }
            Ranked padding(freq.begin(), freq.end());
            rank(padding);
            for (const auto& [tok, _] : padding) {
                if (out[c].size() == n) break;
                if (taken.insert(tok).second) out[c].push_back(tok);
            }
        }
    }
    return out;
}

std::string fallback_label(std::span<const std::string> top_words) {
    std::string label;
    for (std::size_t i = 0; i < top_words.size() && i < 3; ++i) {
        if (i) label += "/";
        label += top_words[i];
    }
    return label;
}

providers::ChatRequest label_request(std::span<const std::string> top_words,
                                     std::span<const std::string> sample_phrases) {
    std::string words;
    for (const auto& w : top_words) {
        if (!words.empty()) words += ", ";
        words += w;
    }
    std::string samples;
    for (const auto& p : sample_phrases) samples += "- " + p + "\n";
    providers::ChatRequest req;
    req.system_prompt =
        "You name topics. Given the representative words of a group of key phrases, you reply with one "
        "short topic label.";
    req.user_prompt = "TOP WORDS: " + words + "\nSAMPLE PHRASES:\n" + samples +
                      "Reply with a single-line label of at most 60 characters that captures the main theme "
                      "of this group. Reply with the label only.\n";
    return req;
}

TopicLabel label_topic(std::span<const std::string> top_words, std::span<const std::string> sample_phrases,
                       providers::ChatProvider& provider) {
    if (top_words.empty()) throw InputError("label_topic requires at least one top word");
    std::string reply;
    try {
        reply = provider.complete(label_request(top_words, sample_phrases));
    } catch (const std::exception& e) {
        logger()->warn("topic labeling failed, using fallback label: {}", e.what());
        return TopicLabel{fallback_label(top_words), true};
    }
    std::istringstream in(reply);
    std::string line;
    while (std::getline(in, line)) {
        line = collapse_whitespace(line);
        if (line.starts_with("- ")) line.erase(0, 2);
        if (!line.empty()) break;
    }
    if (line.empty()) return TopicLabel{fallback_label(top_words), true};
    // Truncate on a codepoint boundary.
    std::u32string cps = unicode::decode(line);
    if (cps.size() > kMaxLabelChars) cps.resize(kMaxLabelChars);
    return TopicLabel{unicode::encode(cps), false};
}

}  // namespace qualit::clustering
