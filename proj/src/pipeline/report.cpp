#include "qualit/error.hpp"
#include "qualit/pipeline.hpp"

#include <fstream>
#include <sstream>

namespace qualit::pipeline {

using nlohmann::json;

namespace {

json label_json(const clustering::TopicLabel& label) {
    return json{{"text", label.text}, {"fallback", label.fallback}};
}

json diagnostics_json(const std::vector<clustering::KDiagnostic>& diags) {
    json out = json::array();
    for (const auto& d : diags) out.push_back({{"k", d.k}, {"mean_silhouette", d.mean_silhouette}});
    return out;
}

}  // namespace

std::vector<eval::TopicWordSet> main_topic_words(const clustering::TopicHierarchy& h) {
    std::vector<eval::TopicWordSet> out;
    for (const auto& t : h.main_topics) out.push_back(eval::TopicWordSet{t.id, t.top_words});
    return out;
}

json report_json(const eval::EvalReport& report, const std::vector<TopicsAtK>& topics, const json& metadata) {
    json j;
    j["metadata"] = metadata;
    j["rows"] = json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"method", r.method},
                             {"k", r.k},
                             {"topic_coherence", r.tc},
                             {"topic_diversity", r.td},
                             {"topic_coherence_pct", eval::format_percent(r.tc)},
                             {"topic_diversity_pct", eval::format_percent(r.td)}});
    }
    j["averages"] = json::array();
    for (const auto& a : report.averages()) {
        j["averages"].push_back({{"method", a.method},
                                 {"topic_coherence", a.tc},
                                 {"topic_diversity", a.td},
                                 {"topic_coherence_pct", eval::format_percent(a.tc)},
                                 {"topic_diversity_pct", eval::format_percent(a.td)}});
    }
    j["topics"] = json::array();
    for (const auto& run : topics) {
        json mains = json::array();
        for (const auto& t : run.hierarchy.main_topics) {
            json subs = json::array();
            for (const auto& s : t.sub_topics) {
                subs.push_back({{"id", s.id}, {"label", s.label.text}, {"top_words", s.top_words},
                                {"size", s.member_phrase_ids.size()}});
            }
            mains.push_back({{"id", t.id}, {"label", t.label.text}, {"top_words", t.top_words},
                             {"size", t.member_phrase_ids.size()}, {"sub_topics", subs}});
        }
        j["topics"].push_back({{"k", run.k}, {"main_topics", mains}});
    }
    return j;
}

std::string report_csv(const eval::EvalReport& report) {
    std::ostringstream out;
    out << "method,k,topic_coherence,topic_diversity\n";
    const auto averages = report.averages();
    for (const auto& avg : averages) {
        for (const auto& r : report.rows) {
            if (r.method != avg.method) continue;
            out << r.method << ',' << r.k << ',' << eval::format_percent(r.tc) << ','
                << eval::format_percent(r.td) << '\n';
        }
        out << avg.method << ",Avg," << eval::format_percent(avg.tc) << ',' << eval::format_percent(avg.td) << '\n';
    }
    return out.str();
}

std::string report_markdown(const eval::EvalReport& report) {
    std::ostringstream out;
    out << "| Method | No. of Topics | Topic Coherence | Topic Diversity |\n";
    out << "|---|---:|---:|---:|\n";
    for (const auto& avg : report.averages()) {
        for (const auto& r : report.rows) {
            if (r.method != avg.method) continue;
            out << "| " << r.method << " | " << r.k << " | " << eval::format_percent(r.tc) << "% | "
                << eval::format_percent(r.td) << "% |\n";
        }
        out << "| " << avg.method << " | Avg | " << eval::format_percent(avg.tc) << "% | "
            << eval::format_percent(avg.td) << "% |\n";
    }
    return out.str();
}

json hierarchy_json(std::span<const keyphrase::KeyPhrase> phrases, const std::vector<TopicsAtK>& runs) {
    json j;
    j["phrases"] = json::array();
    for (std::size_t i = 0; i < phrases.size(); ++i) {
        j["phrases"].push_back({{"id", i}, {"doc_id", phrases[i].doc_id}, {"text", phrases[i].text},
                                {"coherence", phrases[i].coherence}});
    }
    j["runs"] = json::array();
    for (const auto& run : runs) {
        const auto& h = run.hierarchy;
        json mains = json::array();
        for (const auto& t : h.main_topics) {
            json subs = json::array();
            for (const auto& s : t.sub_topics) {
                subs.push_back({{"id", s.id}, {"label", label_json(s.label)}, {"top_words", s.top_words},
                                {"member_phrase_ids", s.member_phrase_ids}});
            }
            mains.push_back({{"id", t.id},
                             {"label", label_json(t.label)},
                             {"top_words", t.top_words},
                             {"member_phrase_ids", t.member_phrase_ids},
                             {"sub_diagnostics", diagnostics_json(t.sub_diagnostics)},
                             {"sub_topics", subs}});
        }
        j["runs"].push_back({{"k", h.k},
                             {"mode", h.mode == clustering::SelectionMode::fixed ? "fixed" : "auto"},
                             {"mean_silhouette", h.mean_silhouette},
                             {"diagnostics", diagnostics_json(h.diagnostics)},
                             {"main_topics", mains}});
    }
    return j;
}

std::string agreement_table(const std::vector<std::vector<std::string>>& labels) {
    if (labels.empty()) throw InputError("agreement needs at least one topic row");
    const int evaluators = static_cast<int>(labels.front().size());
    if (evaluators < 2) throw InputError("agreement needs at least 2 evaluators");
    std::ostringstream header, rule, values;
    for (int m = 2; m <= evaluators; ++m) {
        if (m == evaluators) {
            header << "| All " << m << " evaluators agreed ";
        } else {
            header << "| At least " << m << " evaluators agreed ";
        }
        rule << "|---:";
        values << "| " << eval::format_percent(eval::agreement_at_least(labels, m)) << "% ";
    }
    return header.str() + "|\n" + rule.str() + "|\n" + values.str() + "|\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace qualit::pipeline
