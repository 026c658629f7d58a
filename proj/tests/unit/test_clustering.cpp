#include <doctest.h>

#include "qualit/clustering.hpp"
#include "qualit/error.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace qualit;
using namespace qualit::clustering;

namespace {

PointSet blobs(std::mt19937_64& rng, const std::vector<std::vector<double>>& centers, int per, double sd) {
    std::normal_distribution<double> noise(0.0, sd);
    PointSet ps(centers.front().size());
    for (const auto& c : centers) {
        for (int i = 0; i < per; ++i) {
            std::vector<double> p = c;
            for (double& x : p) x += noise(rng);
            ps.push_back(p);
        }
    }
    return ps;
}

double oracle_inertia(const PointSet& ps, const std::vector<int>& lab, int k) {
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
        std::vector<double> mean(ps.dims(), 0.0);
        int cnt = 0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (lab[i] != c) continue;
            for (std::size_t d = 0; d < ps.dims(); ++d) mean[d] += ps.row(i)[d];
            ++cnt;
        }
        if (cnt == 0) return std::numeric_limits<double>::infinity();
        for (double& m : mean) m /= cnt;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (lab[i] != c) continue;
            for (std::size_t d = 0; d < ps.dims(); ++d) total += std::pow(ps.row(i)[d] - mean[d], 2);
        }
    }
    return total;
}

// Canonical form of a partition: each point's label replaced by the first
// index that shares it.
std::vector<std::size_t> canonical(const std::vector<int>& lab) {
    std::vector<std::size_t> out(lab.size());
    for (std::size_t i = 0; i < lab.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            if (lab[j] == lab[i]) {
                out[i] = j;
                break;
            }
        }
    }
    return out;
}

keyphrase::KeyPhrase phrase(std::string doc, std::string text, std::vector<double> v) {
    return keyphrase::KeyPhrase{std::move(doc), std::move(text), EmbeddingVector::normalized(std::move(v)), 1.0};
}

class FailingChat final : public providers::ChatProvider {
public:
    std::string complete(const providers::ChatRequest&) override { throw ProviderError("down", 4, 503); }
    std::string id() const override { return "failing"; }
    std::string model() const override { return "failing"; }
};

}  // namespace

TEST_CASE("kmeans matches the brute-force optimal 2-partition for every seed") {
    const auto ps = PointSet::from_rows({{0, 0}, {0, 0.1}, {10, 10}, {10, 10.1}});
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_lab;
    for (int mask = 1; mask < 15; ++mask) {
        std::vector<int> lab(4);
        for (int i = 0; i < 4; ++i) lab[i] = (mask >> i) & 1;
        const double in = oracle_inertia(ps, lab, 2);
        if (in < best) {
            best = in;
            best_lab = lab;
        }
    }
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = kmeans(ps, 2, seed);
        CHECK(canonical(r.assignments) == canonical(best_lab));
        CHECK(r.inertia == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("kmeans degenerate k") {
    const auto ps = PointSet::from_rows({{1, 2}, {3, 5}, {-1, 0}});
    const auto all = kmeans(ps, 3, 1);
    CHECK(all.inertia == 0.0);
    CHECK(std::set<int>(all.assignments.begin(), all.assignments.end()).size() == 3);
    const auto one = kmeans(ps, 1, 1);
    CHECK(one.centroids[0][0] == doctest::Approx(1.0));
    CHECK(one.centroids[0][1] == doctest::Approx(7.0 / 3.0));
    CHECK_THROWS_AS(kmeans(ps, 4, 1), InputError);
    CHECK_THROWS_AS(kmeans(ps, 0, 1), InputError);
    CHECK_THROWS_AS(PointSet::from_rows({{1, 2}, {3}}), InputError);
}

TEST_CASE("kmeans keeps every cluster non-empty even with duplicate points") {
    const auto ps = PointSet::from_rows({{0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 1}});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = kmeans(ps, 4, seed);
        CHECK(std::set<int>(r.assignments.begin(), r.assignments.end()).size() == 4);
    }
}

TEST_CASE("property: kmeans invariants on random data") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + rng() % 60;
        const std::size_t d = 1 + rng() % 8;
        PointSet ps(d);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> p(d);
            for (double& x : p) x = u(rng);
            ps.push_back(p);
        }
        const int k = 1 + static_cast<int>(rng() % std::min<std::size_t>(n, 8));
        const auto r = kmeans(ps, k, trial);
        const auto again = kmeans(ps, k, trial);
        CHECK(r.assignments == again.assignments);
        CHECK(r.centroids == again.centroids);
        CHECK(r.inertia_trace.size() == static_cast<std::size_t>(r.iterations_run));
        for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1]);
        std::set<int> used(r.assignments.begin(), r.assignments.end());
        CHECK(used.size() == static_cast<std::size_t>(k));
        CHECK(*used.begin() == 0);
        CHECK(*used.rbegin() == k - 1);
        CHECK(r.inertia == doctest::Approx(oracle_inertia(ps, r.assignments, k)).epsilon(1e-6));
    }
}

TEST_CASE("kmeans results do not depend on the kernel ISA") {
    std::mt19937_64 rng(9);
    const auto ps = blobs(rng, {{0, 0, 0}, {5, 5, 5}, {0, 5, 10}}, 20, 1.0);
    const auto a = kmeans(ps, 3, 4);
    const auto b = kmeans(ps, 3, 4);
    CHECK(a.assignments == b.assignments);
}

TEST_CASE("silhouette worked examples") {
    const auto two = silhouette(PointSet::from_rows({{0, 0}, {1, 1}}), std::vector<int>{0, 1});
    CHECK(two.per_point == std::vector<double>{0.0, 0.0});
    CHECK(two.mean == 0.0);

    const auto ps = PointSet::from_rows({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
    const auto s = silhouette(ps, std::vector<int>{0, 0, 1, 1});
    const double b = (10.0 + std::sqrt(101.0)) / 2.0;
    for (double v : s.per_point) CHECK(v == doctest::Approx((b - 1.0) / b).epsilon(1e-14));
    CHECK(std::abs(s.mean - 0.9005) < 1e-3);

    const auto same = silhouette(PointSet::from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}}), std::vector<int>{0, 0, 1, 1});
    CHECK(same.mean == 0.0);

    const auto single = silhouette(ps, std::vector<int>{3, 3, 3, 3});
    CHECK(single.mean == 0.0);
    CHECK_THROWS_AS(silhouette(ps, std::vector<int>{0, 1}), InputError);
}

TEST_CASE("silhouette matches the brute-force oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 49;
        const std::size_t d = 1 + rng() % 6;
        std::vector<std::vector<double>> pts(n, std::vector<double>(d));
        for (auto& p : pts) {
            for (double& x : p) x = u(rng);
        }
        const int clusters = 1 + static_cast<int>(rng() % std::min<std::size_t>(n, 6));
        std::vector<int> lab(n);
        for (auto& l : lab) l = static_cast<int>(rng() % clusters) * 7;  // sparse ids
        const auto got = silhouette(PointSet::from_rows(pts), lab);
        const auto want = oracle::silhouette(pts, lab);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(got.per_point[i] - want[i]) <= 1e-9);
            CHECK(got.per_point[i] >= -1.0);
            CHECK(got.per_point[i] <= 1.0);
            mean += want[i];
        }
        CHECK(std::abs(got.mean - mean / n) <= 1e-9);
    }
}

TEST_CASE("default k_max") {
    CHECK(default_k_max(90) == 6);
    CHECK(default_k_max(3) == 2);
    CHECK(default_k_max(20000) == 50);
    CHECK(default_k_max(20000, 30) == 30);
    CHECK(default_k_max(8) == 2);
}

TEST_CASE("select_k recovers planted blob counts") {
    std::mt19937_64 rng(42);
    const auto three = blobs(rng, {{0, 0}, {10, 0}, {5, 9}}, 30, 0.5);
    CHECK(select_k(three, 2, 6, 42).k == 3);
    const auto two = blobs(rng, {{0, 0}, {20, 20}}, 15, 0.5);
    const auto sel = select_k(two, 2, 4, 7);
    CHECK(sel.k == 2);
    CHECK(sel.diagnostics.size() == 3);
    CHECK(sel.best.assignments.size() == two.size());
}

TEST_CASE("select_k ties go to the smaller k") {
    const auto ps = PointSet::from_rows({{2, 2}, {2, 2}, {2, 2}, {2, 2}, {2, 2}});
    const auto sel = select_k(ps, 2, 3, 1);
    CHECK(sel.diagnostics[0].mean_silhouette == sel.diagnostics[1].mean_silhouette);
    CHECK(sel.k == 2);
}

TEST_CASE("select_k preconditions") {
    const auto ps = PointSet::from_rows({{0, 0}, {1, 1}});
    CHECK_THROWS_WITH_AS(select_k(ps, 2, std::nullopt, 1), "too few points for model selection", InputError);
    const auto four = PointSet::from_rows({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    CHECK_THROWS_AS(select_k(four, 2, 4, 1), InputError);
    CHECK_THROWS_AS(select_k(four, 1, 3, 1), InputError);
}

TEST_CASE("property: select_k is invariant to positive scaling and worker count") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int trial = 0; trial < 15; ++trial) {
        std::vector<std::vector<double>> centers(2 + rng() % 4, std::vector<double>(3));
        for (auto& c : centers) {
            for (double& x : c) x = u(rng);
        }
        const auto ps = blobs(rng, centers, 8 + static_cast<int>(rng() % 8), 1.0 + (rng() % 3));
        const auto base = select_k(ps, 2, std::nullopt, trial);
        for (double f : {0.25, 4.0, 1024.0}) CHECK(select_k(ps.scaled(f), 2, std::nullopt, trial).k == base.k);
        CHECK(select_k(ps, 2, std::nullopt, trial, 4).k == base.k);
    }
}

TEST_CASE("top words rank exclusive tokens first") {
    const corpus::Preprocessor tok;
    const std::vector<std::vector<std::string>> clusters = {
        {"encryption key", "encryption chip", "public key encryption", "common word"},
        {"space shuttle", "shuttle launch", "common word"}};
    const auto words = top_words(clusters, {}, tok, 10);
    REQUIRE(words.size() == 2);
    CHECK(words[0].front() == "encryption");
    CHECK(words[1].front() == "shuttle");
    // "common" and "word" appear in both clusters: below same-tf exclusive tokens
    auto pos = [](const std::vector<std::string>& w, const std::string& t) {
        return std::find(w.begin(), w.end(), t) - w.begin();
    };
    CHECK(pos(words[0], "common") > pos(words[0], "chip"));
    CHECK(pos(words[1], "common") > pos(words[1], "launch"));
}

TEST_CASE("top words are padded to n distinct words from member documents") {
    const corpus::Preprocessor tok;
    const std::vector<std::string> doc = {"orbit", "orbit", "moon", "nasa", "rocket", "satellite", "probe", "mars",
                                          "venus", "jupiter", "saturn", "comet", "orbit"};
    const auto words = top_words({{"rocket launch"}}, {{std::span<const std::string>(doc)}}, tok, 10);
    REQUIRE(words[0].size() == 10);
    CHECK(words[0][0] == "launch");
    CHECK(words[0][1] == "rocket");
    CHECK(words[0][2] == "orbit");
    CHECK(std::set<std::string>(words[0].begin(), words[0].end()).size() == 10);
}

TEST_CASE("labels") {
    providers::MockChatProvider mock;
    const std::vector<std::string> words = {"space", "launch", "nasa", "orbit"};
    const auto l = label_topic(words, {}, mock);
    CHECK(l.text == "space/launch/nasa");
    CHECK_FALSE(l.fallback);
    FailingChat failing;
    const auto f = label_topic(words, {}, failing);
    CHECK(f.text == "space/launch/nasa");
    CHECK(f.fallback);
    CHECK_THROWS_AS(label_topic({}, {}, mock), InputError);
    const std::vector<std::string> long_words = {std::string(50, 'a'), std::string(50, 'b')};
    CHECK(label_topic(long_words, {}, mock).text.size() == 60);
}

TEST_CASE("hierarchy recovers planted themes and sub-themes") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.5);
    const std::vector<std::vector<std::string>> words = {{"encryption key", "clipper chip"},
                                                         {"shuttle launch", "mars probe"}};
    std::vector<keyphrase::KeyPhrase> phrases;
    std::vector<int> planted_main, planted_sub;
    for (int t = 0; t < 2; ++t) {
        for (int s = 0; s < 2; ++s) {
            for (int i = 0; i < 10; ++i) {
                // themes 10 apart, sub-themes 3 apart, noise sd 0.5; the
                // large first coordinate keeps the geometry nearly flat
                // after normalization
                std::vector<double> v = {100.0, 10.0 * t + noise(rng), 3.0 * s + noise(rng)};
                phrases.push_back(phrase("d" + std::to_string(i), words[t][s], v));
                planted_main.push_back(t);
                planted_sub.push_back(2 * t + s);
            }
        }
    }
    const corpus::Preprocessor tok;
    providers::MockChatProvider mock;
    const auto h = cluster_hierarchy(phrases, {}, tok, HierarchyConfig{}, mock);
    REQUIRE(h.k == 2);
    std::set<std::size_t> seen;
    for (const auto& main : h.main_topics) {
        REQUIRE(main.sub_topics.size() == 2);
        std::set<int> mains;
        for (auto id : main.member_phrase_ids) mains.insert(planted_main[id]);
        CHECK(mains.size() == 1);
        std::size_t sub_total = 0;
        for (const auto& sub : main.sub_topics) {
            std::set<int> subs;
            for (auto id : sub.member_phrase_ids) subs.insert(planted_sub[id]);
            CHECK(subs.size() == 1);
            sub_total += sub.member_phrase_ids.size();
            CHECK(sub.id.starts_with(main.id + "."));
        }
        CHECK(sub_total == main.member_phrase_ids.size());
        for (auto id : main.member_phrase_ids) CHECK(seen.insert(id).second);
        CHECK_FALSE(main.label.text.empty());
    }
    CHECK(seen.size() == phrases.size());
}

TEST_CASE("small clusters get one sub-topic equal to themselves") {
    std::vector<keyphrase::KeyPhrase> phrases;
    for (int i = 0; i < 5; ++i) phrases.push_back(phrase("d", "phrase number", {1.0, 0.01 * i}));
    HierarchyConfig cfg;
    cfg.mode = SelectionMode::fixed;
    cfg.fixed_k = 1;
    providers::MockChatProvider mock;
    const auto h = cluster_hierarchy(phrases, {}, corpus::Preprocessor{}, cfg, mock);
    REQUIRE(h.main_topics.size() == 1);
    REQUIRE(h.main_topics[0].sub_topics.size() == 1);
    CHECK(h.main_topics[0].sub_topics[0].member_phrase_ids == h.main_topics[0].member_phrase_ids);
}

TEST_CASE("fixed k yields exactly k main topics, deterministically") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    std::vector<keyphrase::KeyPhrase> phrases;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> v(16);
        for (double& x : v) x = g(rng);
        phrases.push_back(phrase("d" + std::to_string(i % 7), "phrase " + std::to_string(i), v));
    }
    HierarchyConfig cfg;
    cfg.mode = SelectionMode::fixed;
    cfg.fixed_k = 20;
    providers::MockChatProvider mock;
    const auto a = cluster_hierarchy(phrases, {}, corpus::Preprocessor{}, cfg, mock);
    CHECK(a.main_topics.size() == 20);
    CHECK(a.diagnostics.empty());
    cfg.workers = 4;
    const auto b = cluster_hierarchy(phrases, {}, corpus::Preprocessor{}, cfg, mock);
    for (std::size_t t = 0; t < 20; ++t) {
        CHECK(a.main_topics[t].member_phrase_ids == b.main_topics[t].member_phrase_ids);
        CHECK(a.main_topics[t].label.text == b.main_topics[t].label.text);
    }
    CHECK_THROWS_AS(cluster_hierarchy(std::span(phrases).first(2), {}, corpus::Preprocessor{}, cfg, mock),
                    InputError);
}
