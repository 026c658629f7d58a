#include "qualit/eval.hpp"

#include "qualit/error.hpp"
#include "qualit/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

namespace qualit::eval {

using nlohmann::json;

CorpusStats CorpusStats::build(std::span<const corpus::TokenizedDocument> docs) {
    CorpusStats stats;
    stats.doc_count_ = docs.size();
    bool any = false;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::unordered_set<std::string_view> seen;
        for (const auto& tok : docs[d].tokens) {
            if (!seen.insert(tok).second) continue;
            stats.postings_[tok].push_back(static_cast<std::uint32_t>(d));
            any = true;
        }
    }
    if (!any) throw InputError("cannot build corpus statistics: every document is empty");
    return stats;
}

void CorpusStats::merge(const CorpusStats& other) {
    const auto offset = static_cast<std::uint32_t>(doc_count_);
    for (const auto& [tok, docs] : other.postings_) {
        auto& mine = postings_[tok];
        for (std::uint32_t d : docs) mine.push_back(d + offset);
    }
    doc_count_ += other.doc_count_;
}

std::size_t CorpusStats::doc_freq(std::string_view token) const {
    auto it = postings_.find(std::string(token));
    return it == postings_.end() ? 0 : it->second.size();
}

std::size_t CorpusStats::pair_doc_freq(std::string_view x, std::string_view y) const {
    auto ix = postings_.find(std::string(x));
    auto iy = postings_.find(std::string(y));
    if (ix == postings_.end() || iy == postings_.end()) return 0;
    const auto& a = ix->second;
    const auto& b = iy->second;
    std::size_t count = 0;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

std::vector<std::uint64_t> CorpusStats::bitset(std::string_view token) const {
    std::vector<std::uint64_t> bits((doc_count_ + 63) / 64, 0);
    if (auto it = postings_.find(std::string(token)); it != postings_.end()) {
        for (std::uint32_t d : it->second) bits[d / 64] |= std::uint64_t{1} << (d % 64);
    }
    return bits;
}

double npmi_from_counts(std::size_t df_x, std::size_t df_y, std::size_t df_xy, std::size_t n, double epsilon) {
    if (n == 0 || df_xy == 0) return -1.0;
    const double total = static_cast<double>(n);
    const double pxy = static_cast<double>(df_xy) / total;
    if (pxy >= 1.0) return 1.0;
    const double px = static_cast<double>(df_x) / total;
    const double py = static_cast<double>(df_y) / total;
    const double value = std::log(pxy / (px * py)) / -std::log(pxy + epsilon);
    return std::clamp(value, -1.0, 1.0);
}

double npmi(std::string_view x, std::string_view y, const CorpusStats& stats, double epsilon) {
    return npmi_from_counts(stats.doc_freq(x), stats.doc_freq(y), stats.pair_doc_freq(x, y), stats.doc_count(),
                            epsilon);
}

std::vector<double> per_topic_coherence(std::span<const TopicWordSet> topics, const CorpusStats& stats) {
    std::map<std::string, std::vector<std::uint64_t>> bits;
    std::map<std::string, std::size_t> df;
    for (const auto& t : topics) {
        if (t.words.size() < 2) throw InputError("topic " + t.topic_id + " has fewer than 2 words");
        for (const auto& w : t.words) {
            if (bits.contains(w)) continue;
            bits.emplace(w, stats.bitset(w));
            df.emplace(w, stats.doc_freq(w));
        }
    }
    std::vector<double> out;
    out.reserve(topics.size());
    for (const auto& t : topics) {
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < t.words.size(); ++i) {
            for (std::size_t j = i + 1; j < t.words.size(); ++j) {
                const auto& a = t.words[i];
                const auto& b = t.words[j];
                const auto both = static_cast<std::size_t>(kernels::and_popcount(bits[a], bits[b]));
                sum += npmi_from_counts(df[a], df[b], both, stats.doc_count());
                ++pairs;
            }
        }
        out.push_back(sum / static_cast<double>(pairs));
    }
    return out;
}

double topic_coherence(std::span<const TopicWordSet> topics, const CorpusStats& stats) {
    if (topics.empty()) throw InputError("no topics");
    const auto per_topic = per_topic_coherence(topics, stats);
    double sum = 0.0;
    for (double v : per_topic) sum += v;
    return sum / static_cast<double>(per_topic.size());
}

double topic_diversity(std::span<const TopicWordSet> topics) {
    std::set<std::string> distinct;
    std::size_t total = 0;
    for (const auto& t : topics) {
        total += t.words.size();
        distinct.insert(t.words.begin(), t.words.end());
    }
    if (total == 0) throw InputError("topic diversity needs at least one topic word");
    return static_cast<double>(distinct.size()) / static_cast<double>(total);
}

double agreement_at_least(const std::vector<std::vector<std::string>>& labels, int m) {
    if (labels.empty()) throw InputError("agreement needs at least one topic row");
    const std::size_t evaluators = labels.front().size();
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r].size() != evaluators) {
            throw InputError("row " + std::to_string(r + 1) + " has " + std::to_string(labels[r].size()) +
                             " evaluators, expected " + std::to_string(evaluators));
        }
    }
    if (m < 2 || static_cast<std::size_t>(m) > evaluators) {
        throw InputError("m must be between 2 and the evaluator count (" + std::to_string(evaluators) + ")");
    }
    std::size_t agreed = 0;
    for (const auto& row : labels) {
        std::map<std::string, int> votes;
        int best = 0;
        for (const auto& cell : row) {
            if (!cell.empty()) best = std::max(best, ++votes[cell]);
        }
        if (best >= m) ++agreed;
    }
    return static_cast<double>(agreed) / static_cast<double>(labels.size());
}

std::vector<TopicWordSet> load_topics_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open topic file: " + path.string());
    std::vector<TopicWordSet> topics;
    std::set<std::string> ids;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        const auto rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) throw InputError(where + "malformed JSON record");
        if (!rec.contains("topic_id")) throw InputError(where + "missing field topic_id");
        if (!rec.contains("words")) throw InputError(where + "missing field words");
        TopicWordSet t;
        if (rec["topic_id"].is_string()) {
            t.topic_id = rec["topic_id"].get<std::string>();
        } else if (rec["topic_id"].is_number_integer()) {
            t.topic_id = std::to_string(rec["topic_id"].get<long long>());
        } else {
            throw InputError(where + "topic_id must be a string");
        }
        if (!rec["words"].is_array()) throw InputError(where + "words must be an array of strings");
        std::set<std::string> seen;
        for (const auto& w : rec["words"]) {
            if (!w.is_string()) throw InputError(where + "words must be an array of strings");
            auto word = w.get<std::string>();
            if (!seen.insert(word).second) throw InputError(where + "duplicate word " + word + " in topic " + t.topic_id);
            t.words.push_back(std::move(word));
        }
        if (!ids.insert(t.topic_id).second) throw InputError(where + "duplicate topic_id " + t.topic_id);
        topics.push_back(std::move(t));
    }
    if (topics.empty()) throw InputError("no topics");
    return topics;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    for (auto& c : cells) {
        const auto b = c.find_first_not_of(" \t");
        const auto e = c.find_last_not_of(" \t");
        c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
    }
    return cells;
}

}  // namespace

std::vector<std::vector<std::string>> load_agreement_csv(const std::filesystem::path& path, bool skip_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open agreement CSV: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && skip_header) continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        rows.push_back(split_csv_line(line));
        if (rows.back().size() != rows.front().size()) {
            throw InputError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(rows.front().size()) + " columns, got " +
                             std::to_string(rows.back().size()));
        }
    }
    if (rows.empty()) throw InputError("agreement CSV has no rows: " + path.string());
    return rows;
}

std::vector<MethodAverage> EvalReport::averages() const {
    std::vector<MethodAverage> out;
    std::vector<std::size_t> counts;
    for (const auto& row : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& a) { return a.method == row.method; });
        if (it == out.end()) {
            out.push_back(MethodAverage{row.method, 0.0, 0.0});
            counts.push_back(0);
            it = out.end() - 1;
        }
        it->tc += row.tc;
        it->td += row.td;
        ++counts[static_cast<std::size_t>(it - out.begin())];
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].tc /= static_cast<double>(counts[i]);
        out[i].td /= static_cast<double>(counts[i]);
    }
    return out;
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
    std::string s = buf;
    if (s == "-0.0") s = "0.0";
    return s;
}

}  // namespace qualit::eval
