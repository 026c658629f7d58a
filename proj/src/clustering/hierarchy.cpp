#include "qualit/clustering.hpp"
#include "qualit/error.hpp"
#include "qualit/parallel.hpp"

#include <map>
#include <set>

namespace qualit::clustering {

namespace {

constexpr std::size_t kLabelSamples = 10;

std::uint64_t sub_seed(std::uint64_t seed, std::size_t topic) {
    return seed + 0x9e3779b97f4a7c15ULL * (topic + 1);
}

std::vector<std::vector<std::size_t>> group(const std::vector<int>& assignments, int k,
                                            std::span<const std::size_t> ids) {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(ids[i]);
    return out;
}

struct LabelJob {
    const std::vector<std::string>* words;
    std::vector<std::string> samples;
    TopicLabel* target;
};

}  // namespace

TopicHierarchy cluster_hierarchy(std::span<const keyphrase::KeyPhrase> phrases,
                                 std::span<const corpus::TokenizedDocument> docs,
                                 const corpus::Preprocessor& tokenizer, const HierarchyConfig& cfg,
                                 providers::ChatProvider& labeler) {
    const std::size_t n = phrases.size();
    if (n < 3) throw InputError("at least 3 kept phrases are required for clustering, got " + std::to_string(n));
    const PointSet points = PointSet::from_phrases(phrases);

    std::map<std::string, std::span<const std::string>> doc_tokens;
    for (const auto& d : docs) doc_tokens.emplace(d.doc_id, d.tokens);

    auto phrase_texts = [&](const std::vector<std::size_t>& members) {
        std::vector<std::string> out;
        out.reserve(members.size());
        for (std::size_t id : members) out.push_back(phrases[id].text);
        return out;
    };
    auto member_docs = [&](const std::vector<std::size_t>& members) {
        std::vector<std::span<const std::string>> out;
        std::set<std::string> seen;
        for (std::size_t id : members) {
            const auto& doc_id = phrases[id].doc_id;
            if (!seen.insert(doc_id).second) continue;
            if (auto it = doc_tokens.find(doc_id); it != doc_tokens.end()) out.push_back(it->second);
        }
        return out;
    };

    TopicHierarchy h;
    h.mode = cfg.mode;
    std::vector<std::size_t> all_ids(n);
    for (std::size_t i = 0; i < n; ++i) all_ids[i] = i;

    KMeansResult level1;
    if (cfg.mode == SelectionMode::fixed) {
        if (!cfg.fixed_k) throw ConfigError("fixed clustering mode requires k");
        level1 = kmeans(points, *cfg.fixed_k, cfg.seed);
        h.k = *cfg.fixed_k;
        h.mean_silhouette = silhouette(points, level1.assignments).mean;
    } else {
        auto sel = select_k(points, 2, std::nullopt, cfg.seed, cfg.workers, cfg.k_ceiling);
        h.k = sel.k;
        h.diagnostics = std::move(sel.diagnostics);
        for (const auto& d : h.diagnostics) {
            if (d.k == sel.k) h.mean_silhouette = d.mean_silhouette;
        }
        level1 = std::move(sel.best);
    }

    const auto main_members = group(level1.assignments, h.k, all_ids);
    std::vector<std::vector<std::string>> main_texts;
    std::vector<std::vector<std::span<const std::string>>> main_docs;
    for (const auto& m : main_members) {
        main_texts.push_back(phrase_texts(m));
        main_docs.push_back(member_docs(m));
    }
    auto main_words = top_words(main_texts, main_docs, tokenizer, cfg.top_n);

    h.main_topics.resize(h.k);
    for (int t = 0; t < h.k; ++t) {
        MainTopic& topic = h.main_topics[t];
        topic.id = "t" + std::to_string(t);
        topic.member_phrase_ids = main_members[t];
        topic.top_words = std::move(main_words[t]);

        std::vector<std::vector<std::size_t>> subs;
        const auto& members = topic.member_phrase_ids;
        if (members.size() >= static_cast<std::size_t>(cfg.sub_min_members)) {
            const PointSet sub_points = points.subset(members);
            auto sel = select_k(sub_points, 2, std::nullopt, sub_seed(cfg.seed, t), cfg.workers, cfg.k_ceiling);
            topic.sub_diagnostics = std::move(sel.diagnostics);
            subs = group(sel.best.assignments, sel.k, members);
        } else {
            subs.push_back(members);
        }

        std::vector<std::vector<std::string>> sub_texts;
        std::vector<std::vector<std::span<const std::string>>> sub_docs;
        for (const auto& s : subs) {
            sub_texts.push_back(phrase_texts(s));
            sub_docs.push_back(member_docs(s));
        }
        auto sub_words = top_words(sub_texts, sub_docs, tokenizer, cfg.top_n);
        for (std::size_t s = 0; s < subs.size(); ++s) {
            topic.sub_topics.push_back(
                SubTopic{topic.id + "." + std::to_string(s), {}, std::move(sub_words[s]), std::move(subs[s])});
        }
    }

    // Labels are requested in topic-id order and written back by index.
    std::vector<LabelJob> jobs;
    auto samples = [&](const std::vector<std::size_t>& members) {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (std::size_t id : members) {
            if (out.size() == kLabelSamples) break;
            if (seen.insert(phrases[id].text).second) out.push_back(phrases[id].text);
        }
        return out;
    };
    for (auto& topic : h.main_topics) {
        jobs.push_back(LabelJob{&topic.top_words, samples(topic.member_phrase_ids), &topic.label});
        for (auto& sub : topic.sub_topics) {
            jobs.push_back(LabelJob{&sub.top_words, samples(sub.member_phrase_ids), &sub.label});
        }
    }
    auto labels = parallel_map(jobs.size(), cfg.workers, [&](std::size_t i) {
        if (jobs[i].words->empty()) return TopicLabel{"(unlabeled)", true};
        return label_topic(*jobs[i].words, jobs[i].samples, labeler);
    });
    for (std::size_t i = 0; i < jobs.size(); ++i) *jobs[i].target = std::move(labels[i]);
    return h;
}

}  // namespace qualit::clustering
