#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace qualit::corpus {

struct Document {
    std::string id;
    std::string text;
    std::optional<std::string> label;
};

struct TokenizedDocument {
    std::string doc_id;
    std::vector<std::string> tokens;
};

enum class NormalizeMode { stem, lemma_dictionary, none };

struct PreprocessOptions {
    int min_token_len = 3;
    std::string stopword_list_id = "english-standard";
    NormalizeMode normalize_mode = NormalizeMode::stem;
};

struct LoadResult {
    std::vector<Document> documents;
    // One entry per skipped file.
    std::vector<std::string> warnings;
};

// <root>/<category>/<file>, one document per file. Documents come back sorted
// by id ("<category>/<file>"); empty or unreadable files are skipped.
LoadResult load_20newsgroups(const std::filesystem::path& root);

// {"id", "text", "label"?} per line, input order preserved. Blank lines are
// ignored but still counted for error line numbers.
std::vector<Document> load_jsonl(const std::filesystem::path& path);

// Directories load as 20NG layouts, regular files as JSONL.
LoadResult load_any(const std::filesystem::path& path);

// Active stopwords plus optional lemma table. Built once per run and shared
// read-only between threads.
class Preprocessor {
public:
    explicit Preprocessor(PreprocessOptions opts = {});

    // Replaces the built-in list. One lowercase token per line.
    void load_stopwords(const std::filesystem::path& path);
    // word<TAB>lemma per line.
    void load_lemma_dictionary(const std::filesystem::path& path);

    const PreprocessOptions& options() const { return opts_; }
    bool is_stopword(std::string_view token) const;

    // lowercase -> strip non-letters -> split -> drop stopwords -> drop short
    // tokens -> normalize.
    TokenizedDocument preprocess(const Document& doc) const;
    std::vector<std::string> tokenize(std::string_view text) const;

private:
    std::string normalize(const std::string& token) const;

    PreprocessOptions opts_;
    std::unordered_set<std::string> stopwords_;
    std::unordered_map<std::string, std::string> lemmas_;
};

TokenizedDocument preprocess(const Document& doc, const PreprocessOptions& opts);

// Versioned built-in English list; id "english-standard".
const std::vector<std::string_view>& builtin_stopwords(std::string_view list_id);

// Plural-stripping stemmer: ies->y, es->e, s->"" with the usual exceptions.
// stem(stem(w)) == stem(w) for every w.
std::string stem(std::string_view word);

NormalizeMode parse_normalize_mode(std::string_view name);
std::string_view normalize_mode_name(NormalizeMode mode);

}  // namespace qualit::corpus
