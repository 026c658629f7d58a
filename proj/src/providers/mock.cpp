#include "qualit/error.hpp"
#include "qualit/providers.hpp"
#include "qualit/unicode.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace qualit::providers {
namespace {

constexpr std::uint64_t kBucketSeed = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSignSeed = 0xc2b2ae3d27d4eb4fULL;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::string mock_extract(const std::string& tokens_line) {
    std::vector<std::string> order;
    std::unordered_map<std::string, int> freq;
    std::istringstream in(tokens_line);
    std::string token;
    while (in >> token) {
        if (freq[token]++ == 0) order.push_back(token);
    }
    // order is first-occurrence order, so a stable sort on frequency keeps it
    // as the tie-breaker.
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) { return freq[a] > freq[b]; });
    std::string out;
    for (std::size_t i = 0; i < order.size() && i < 5; ++i) out += "- " + order[i] + "\n";
    return out;
}

std::string mock_label(std::string_view words_line) {
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start <= words_line.size()) {
        auto comma = words_line.find(',', start);
        if (comma == std::string_view::npos) comma = words_line.size();
        std::string w = trim(words_line.substr(start, comma - start));
        if (!w.empty()) words.push_back(std::move(w));
        start = comma + 1;
    }
    std::string label;
    for (std::size_t i = 0; i < words.size() && i < 3; ++i) {
        if (i) label += "/";
        label += words[i];
    }
    return label;
}

}  // namespace

HashedFeature hash_feature(std::string_view token, std::size_t dims) {
    const std::uint64_t h = fnv1a(token);
    return HashedFeature{static_cast<std::size_t>(mix(h ^ kBucketSeed) % dims),
                         (mix(h ^ kSignSeed) & 1U) ? 1.0 : -1.0};
}

std::string MockChatProvider::complete(const ChatRequest& request) {
    request.validate();
    ++calls_;
    const auto lines = split_lines(request.user_prompt);
    for (std::size_t i = lines.size(); i-- > 0;) {
        if (lines[i] == "TOKENS:") return mock_extract(i + 1 < lines.size() ? lines[i + 1] : "");
    }
    for (const auto& line : lines) {
        if (line.starts_with("TOP WORDS:")) return mock_label(std::string_view(line).substr(10));
    }
    return {};
}

EmbeddingVector MockEmbedder::embed(std::string_view text) {
    if (text.empty()) throw InputError("cannot embed empty text");
    ++calls_;
    std::vector<double> values(dims_, 0.0);
    for (const auto& token : unicode::letter_tokens(unicode::to_lower(text))) {
        const auto f = hash_feature(token, dims_);
        values[f.bucket] += f.sign;
    }
    if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; })) {
        return EmbeddingVector::basis(dims_, 0);
    }
    return EmbeddingVector::normalized(std::move(values));
}

}  // namespace qualit::providers
