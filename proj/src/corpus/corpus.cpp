#include "qualit/corpus.hpp"
#include "qualit/error.hpp"
#include "qualit/log.hpp"
#include "qualit/unicode.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qualit::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

NormalizeMode parse_normalize_mode(std::string_view name) {
    if (name == "stem") return NormalizeMode::stem;
    if (name == "lemma_dictionary") return NormalizeMode::lemma_dictionary;
    if (name == "none") return NormalizeMode::none;
    throw InputError("unknown normalize_mode: " + std::string(name));
}

std::string_view normalize_mode_name(NormalizeMode mode) {
    switch (mode) {
        case NormalizeMode::stem: return "stem";
        case NormalizeMode::lemma_dictionary: return "lemma_dictionary";
        case NormalizeMode::none: return "none";
    }
    return "none";
}

LoadResult load_20newsgroups(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw InputError("corpus path does not exist or is not a directory: " + root.string());
    }
    LoadResult result;
    for (const auto& category : fs::directory_iterator(root)) {
        if (!category.is_directory()) continue;
        const std::string label = category.path().filename().string();
        if (label.starts_with(".")) continue;
        for (const auto& entry : fs::directory_iterator(category.path())) {
            const std::string name = entry.path().filename().string();
            if (!entry.is_regular_file() || name.starts_with(".")) continue;
            const std::string id = label + "/" + name;
            std::ifstream in(entry.path(), std::ios::binary);
            if (!in) {
                result.warnings.push_back("unreadable file skipped: " + id);
                continue;
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            std::string text = buf.str();
            if (blank(text)) {
                result.warnings.push_back("empty file skipped: " + id);
                continue;
            }
            result.documents.push_back(Document{id, std::move(text), label});
        }
    }
    for (const auto& w : result.warnings) logger()->warn("{}", w);
    if (result.documents.empty()) {
        throw InputError("no documents loaded from " + root.string());
    }
    std::sort(result.documents.begin(), result.documents.end(),
              [](const Document& a, const Document& b) { return a.id < b.id; });
    return result;
}

std::vector<Document> load_jsonl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open corpus file: " + path.string());
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InputError(where + "malformed JSON (" + e.what() + ")");
        }
        if (!record.is_object()) throw InputError(where + "record is not an object");
        for (const char* field : {"id", "text"}) {
            if (!record.contains(field)) throw InputError(where + "missing field " + field);
            if (!record[field].is_string()) throw InputError(where + "field " + field + " is not a string");
        }
        Document doc{record["id"].get<std::string>(), record["text"].get<std::string>(), std::nullopt};
        if (record.contains("label") && !record["label"].is_null()) {
            if (!record["label"].is_string()) throw InputError(where + "field label is not a string");
            doc.label = record["label"].get<std::string>();
        }
        if (doc.id.empty()) throw InputError(where + "empty id");
        if (blank(doc.text)) throw InputError(where + "empty text");
        if (!seen.insert(doc.id).second) throw InputError(where + "duplicate id " + doc.id);
        docs.push_back(std::move(doc));
    }
    if (docs.empty()) throw InputError("no documents in " + path.string());
    return docs;
}

LoadResult load_any(const fs::path& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) return load_20newsgroups(path);
    if (!fs::exists(path, ec)) throw InputError("corpus path does not exist: " + path.string());
    return LoadResult{load_jsonl(path), {}};
}

Preprocessor::Preprocessor(PreprocessOptions opts) : opts_(std::move(opts)) {
    if (opts_.min_token_len < 1) throw InputError("min_token_len must be >= 1");
    for (auto w : builtin_stopwords(opts_.stopword_list_id)) stopwords_.emplace(w);
}

void Preprocessor::load_stopwords(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open stopword file: " + path.string());
    stopwords_.clear();
    std::string line;
    while (std::getline(in, line)) {
        const std::string word = unicode::normalize_phrase(line);
        if (!word.empty()) stopwords_.insert(word);
    }
}

void Preprocessor::load_lemma_dictionary(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open lemma dictionary: " + path.string());
    lemmas_.clear();
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw InputError("lemma dictionary line " + std::to_string(line_no) + ": expected word<TAB>lemma");
        }
        lemmas_[unicode::to_lower(line.substr(0, tab))] = unicode::to_lower(line.substr(tab + 1));
    }
}

bool Preprocessor::is_stopword(std::string_view token) const {
    return stopwords_.contains(std::string(token));
}

std::string Preprocessor::normalize(const std::string& token) const {
    std::string candidate;
    switch (opts_.normalize_mode) {
        case NormalizeMode::none:
            return token;
        case NormalizeMode::stem:
            candidate = stem(token);
            break;
        case NormalizeMode::lemma_dictionary: {
            auto it = lemmas_.find(token);
            if (it == lemmas_.end()) return token;
            candidate = it->second;
            break;
        }
    }
    // A normalized form must itself survive the filters, otherwise
    // re-preprocessing the output would drop it.
    const auto parts = unicode::letter_tokens(candidate);
    if (parts.size() != 1 || parts.front() != candidate) return token;
    if (unicode::length(candidate) < static_cast<std::size_t>(opts_.min_token_len)) return token;
    if (is_stopword(candidate)) return token;
    return candidate;
}

std::vector<std::string> Preprocessor::tokenize(std::string_view text) const {
    std::vector<std::string> out;
    for (auto& token : unicode::letter_tokens(text)) {
        if (is_stopword(token)) continue;
        if (unicode::length(token) < static_cast<std::size_t>(opts_.min_token_len)) continue;
        out.push_back(normalize(token));
    }
    return out;
}

TokenizedDocument Preprocessor::preprocess(const Document& doc) const {
    return TokenizedDocument{doc.id, tokenize(doc.text)};
}

TokenizedDocument preprocess(const Document& doc, const PreprocessOptions& opts) {
    return Preprocessor(opts).preprocess(doc);
}

}  // namespace qualit::corpus
