// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include "oracles.hpp"
#include "qualit/clustering.hpp"
#include "qualit/eval.hpp"
#include "qualit/keyphrase.hpp"
#include "qualit/log.hpp"
#include "qualit/pipeline.hpp"
#include "test_util.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>

using namespace qualit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kSilhouetteTol = 1e-9;
constexpr double kNpmiTol = 1e-12;
constexpr double kAverageTol = 1e-12;
constexpr double kSilhouetteBudgetS = 10.0;
constexpr double kKMeansBudgetS = 10.0;
constexpr double kSelectBudgetS = 30.0;
constexpr double kEndToEndBudgetS = 20.0;
constexpr int kSelectRequired = 95;

const fs::path kData = QUALIT_DATA_DIR;

struct Verdict {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Verdict()>& check, double budget_s = 0.0) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && secs >= budget_s) {
        v.pass = false;
        v.detail += "; over time budget";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << " (" << v.detail << ", " << timing << ")" << std::endl;
    if (!v.pass) ++failures;
}

std::string run_cli(const std::string& args, const fs::path& cwd, int& code) {
    const auto out = cwd / "stdout.txt";
    const std::string cmd = "cd '" + cwd.string() + "' && '" + std::string(QUALIT_BINARY) + "' " + args + " >'" +
                            out.string() + "' 2>/dev/null";
    const int status = std::system(cmd.c_str());
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    const std::string text = test::read(out);
    return text.substr(0, text.find('\n'));
}

Verdict silhouette_oracle() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    double worst = 0.0;
    for (int instance = 0; instance < 100; ++instance) {
        const std::size_t n = 2 + rng() % 49;
        const std::size_t d = 1 + rng() % 8;
        const int k = 1 + static_cast<int>(rng() % std::min<std::size_t>(5, n));
        std::vector<std::vector<double>> pts(n, std::vector<double>(d));
        for (auto& p : pts) {
            for (double& x : p) x = u(rng);
        }
        std::vector<int> lab;
        if (instance % 2 == 0) {
            lab = clustering::kmeans(clustering::PointSet::from_rows(pts), k, instance).assignments;
        } else {
            lab.resize(n);
            for (auto& l : lab) l = static_cast<int>(rng() % k);
        }
        const auto got = clustering::silhouette(clustering::PointSet::from_rows(pts), lab);
        const auto want = oracle::silhouette(pts, lab);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(got.per_point[i] - want[i]));
            mean += want[i];
        }
        worst = std::max(worst, std::abs(got.mean - mean / static_cast<double>(n)));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "100 instances, max abs diff %.3g", worst);
    return {worst <= kSilhouetteTol, buf};
}

Verdict kmeans_sanity() {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 3.0);
    int monotone_violations = 0;
    int nondeterministic = 0;
    for (int instance = 0; instance < 50; ++instance) {
        const std::size_t n = 10 + rng() % 200;
        const std::size_t d = 1 + rng() % 16;
        clustering::PointSet ps(d);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> p(d);
            for (double& x : p) x = g(rng);
            ps.push_back(p);
        }
        const int k = 1 + static_cast<int>(rng() % 10);
        const auto a = clustering::kmeans(ps, k, 1000 + instance);
        const auto b = clustering::kmeans(ps, k, 1000 + instance);
        for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) {
            if (a.inertia_trace[i] > a.inertia_trace[i - 1]) ++monotone_violations;
        }
        bool same = a.assignments == b.assignments && a.iterations_run == b.iterations_run &&
                    std::memcmp(&a.inertia, &b.inertia, sizeof(double)) == 0 && a.centroids.size() == b.centroids.size();
        for (std::size_t c = 0; same && c < a.centroids.size(); ++c) {
            same = std::memcmp(a.centroids[c].data(), b.centroids[c].data(), d * sizeof(double)) == 0;
        }
        if (!same) ++nondeterministic;
    }
    return {monotone_violations == 0 && nondeterministic == 0,
            "50 instances, " + std::to_string(monotone_violations) + " inertia increases, " +
                std::to_string(nondeterministic) + " non-identical reruns"};
}

Verdict select_k_recovery() {
    const double sd = 1.0;
    const std::vector<std::vector<double>> centers = {{0.0, 0.0}, {10.0, 0.0}, {5.0, 10.0 * std::sqrt(3.0) / 2.0}};
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, sd);
        clustering::PointSet ps(2);
        for (const auto& c : centers) {
            for (int i = 0; i < 30; ++i) ps.push_back(std::vector<double>{c[0] + noise(rng), c[1] + noise(rng)});
        }
        if (clustering::select_k(ps, 2, std::nullopt, seed).k == 3) ++hits;
    }
    return {hits >= kSelectRequired, std::to_string(hits) + "/100 seeds chose k=3"};
}

Verdict npmi_oracle() {
    using Docs = std::vector<std::vector<std::string>>;
    auto stats_of = [](const Docs& docs) {
        std::vector<corpus::TokenizedDocument> tds;
        for (std::size_t i = 0; i < docs.size(); ++i) tds.push_back({std::to_string(i), docs[i]});
        return eval::CorpusStats::build(tds);
    };
    struct Case {
        std::string name;
        Docs docs;
        std::string x, y;
        double expected;  // < -2 means "use the brute-force count"
    };
    const std::vector<Case> cases = {
        {"perfect", {{"x", "y"}, {"x", "y"}, {"z"}, {"z"}}, "x", "y", 1.0},
        {"independent", {{"x", "y"}, {"x"}, {"y"}, {"z"}}, "x", "y", 0.0},
        {"disjoint", {{"x"}, {"y"}, {"x"}, {"y"}}, "x", "y", -1.0},
        {"fractional-1", {{"x", "y"}, {"x"}, {"z"}, {"z"}}, "x", "y", -3.0},
        {"fractional-2", {{"x", "y"}, {"x"}, {"x"}, {"x"}, {"y"}, {"y"}, {"y"}, {"w"}}, "x", "y", -3.0},
    };
    double worst = 0.0;
    std::string values;
    for (const auto& c : cases) {
        const double got = eval::npmi(c.x, c.y, stats_of(c.docs));
        const double want = c.expected < -2.0 ? oracle::npmi(c.docs, c.x, c.y) : c.expected;
        worst = std::max(worst, std::abs(got - want));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%s=%.6f", values.empty() ? "" : " ", c.name.c_str(), got);
        values += buf;
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, ", max abs diff %.3g", worst);
    return {worst <= kNpmiTol, values + buf};
}

Verdict topic_diversity_exact() {
    const auto topics = eval::load_topics_jsonl(kData / "reference_topics.jsonl");
    const double reference = eval::topic_diversity(topics);
    const std::vector<eval::TopicWordSet> dup = {topics[1], {"copy", topics[1].words}};
    const double duplicated = eval::topic_diversity(dup);
    char buf[96];
    std::snprintf(buf, sizeof buf, "reference lists TD=%.17g, duplicated topic TD=%.17g", reference, duplicated);
    return {reference == 1.0 && duplicated == 0.5, buf};
}

Verdict hallucination_filter() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int violations = 0;
    for (int set = 0; set < 100; ++set) {
        std::vector<keyphrase::KeyPhrase> ps;
        const int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            ps.push_back({"d", "p" + std::to_string(i), EmbeddingVector::basis(1, 0), u(rng)});
        }
        double t1 = u(rng), t2 = u(rng);
        if (t1 > t2) std::swap(t1, t2);
        const auto r1 = keyphrase::filter_hallucinations(ps, t1);
        const auto r2 = keyphrase::filter_hallucinations(ps, t2);
        if (r1.kept.size() + r1.removed.size() != ps.size()) ++violations;
        std::set<std::string> kept1;
        for (const auto& p : r1.kept) kept1.insert(p.text);
        for (const auto& p : r2.kept) {
            if (!kept1.count(p.text)) ++violations;
        }
        for (const auto& p : r1.removed) {
            if (kept1.count(p.text)) ++violations;
        }
    }
    const std::vector<keyphrase::KeyPhrase> boundary = {{"d", "a", EmbeddingVector::basis(1, 0), 0.05},
                                                        {"d", "b", EmbeddingVector::basis(1, 0), 0.10},
                                                        {"d", "c", EmbeddingVector::basis(1, 0), 0.95}};
    const auto r = keyphrase::filter_hallucinations(boundary, 0.10);
    const bool boundary_ok = r.kept.size() == 2 && r.kept[0].coherence == 0.10 && r.removed.size() == 1 &&
                             r.removed[0].coherence == 0.05;
    return {violations == 0 && boundary_ok, "100 sets, " + std::to_string(violations) +
                                                 " monotonicity/partition violations, boundary " +
                                                 (boundary_ok ? "kept" : "NOT kept")};
}

Verdict end_to_end() {
    test::TempDir dir;
    const std::string args = "run '" + (kData / "example_config.json").string() +
                             "' --dump-phrases --dump-hierarchy --cache-dir cache";
    int c1 = 0, c2 = 0;
    const fs::path a = dir.path() / run_cli(args, dir.path(), c1);
    const fs::path b = dir.path() / run_cli(args, dir.path(), c2);
    if (c1 != 0 || c2 != 0) return {false, "exit codes " + std::to_string(c1) + "/" + std::to_string(c2)};
    int compared = 0;
    std::string differing;
    for (const char* f : {"manifest.json", "report.json", "report.csv", "report.md", "phrases.jsonl", "hierarchy.json"}) {
        if (!fs::exists(a / f) || test::read(a / f) != test::read(b / f)) differing += std::string(" ") + f;
        ++compared;
    }
    const auto manifest = json::parse(test::read(a / "manifest.json"));
    const bool offline =
        manifest["providers"]["chat"]["kind"] == "mock" && manifest["providers"]["embedder"]["kind"] == "mock";
    const bool sized = manifest["counts"]["documents"] == 60;
    return {differing.empty() && offline && sized,
            std::to_string(compared) + " artifacts compared" +
                (differing.empty() ? ", all byte-identical" : ", differing:" + differing) +
                (offline ? ", mock providers" : ", NON-MOCK providers")};
}

Verdict sweep_structure() {
    test::TempDir dir;
    int code = 0;
    const fs::path run = dir.path() / run_cli("run '" + (kData / "sweep_config.json").string() + "' --no-cache",
                                              dir.path(), code);
    if (code != 0) return {false, "exit code " + std::to_string(code)};
    const auto report = json::parse(test::read(run / "report.json"));
    const auto& rows = report["rows"];
    std::vector<int> ks;
    double tc = 0.0, td = 0.0;
    for (const auto& r : rows) {
        ks.push_back(r["k"].get<int>());
        tc += r["topic_coherence"].get<double>();
        td += r["topic_diversity"].get<double>();
    }
    const auto& avg = report["averages"];
    bool ok = ks == std::vector<int>{10, 20, 30, 40, 50} && avg.size() == 1;
    if (ok) {
        const double atc = avg[0]["topic_coherence"].get<double>();
        const double atd = avg[0]["topic_diversity"].get<double>();
        ok = std::abs(atc - tc / 5.0) <= kAverageTol && std::abs(atd - td / 5.0) <= kAverageTol &&
             avg[0]["topic_coherence_pct"] == eval::format_percent(tc / 5.0) &&
             avg[0]["topic_diversity_pct"] == eval::format_percent(td / 5.0);
    }
    const std::string csv = test::read(run / "report.csv");
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    ok = ok && lines == 7;
    return {ok, std::to_string(rows.size()) + " rows (k=10..50) + Avg row, csv lines " + std::to_string(lines)};
}

Verdict agreement_arithmetic() {
    const auto labels = eval::load_agreement_csv(kData / "agreement_labels.csv");
    const double m2 = eval::agreement_at_least(labels, 2);
    const double m3 = eval::agreement_at_least(labels, 3);
    const double m4 = eval::agreement_at_least(labels, 4);
    const bool ok = labels.size() == 20 && labels.front().size() == 4 && m2 == 16.0 / 20.0 && m3 == 10.0 / 20.0 &&
                    m4 == 7.0 / 20.0;
    return {ok, eval::format_percent(m2) + "% / " + eval::format_percent(m3) + "% / " + eval::format_percent(m4) +
                    "% on a " + std::to_string(labels.size()) + "x" + std::to_string(labels.front().size()) + " CSV"};
}

// Real providers on a 200-document 20 Newsgroups subset. Needs
// QUALIT_PROVIDER_ENDPOINT, QUALIT_EMBED_ENDPOINT and QUALIT_20NG_DIR.
std::optional<Verdict> live_smoke() {
    const auto env = providers::ProviderEnvironment::from_env();
    const char* ng = std::getenv("QUALIT_20NG_DIR");
    if (env.chat_endpoint.empty() || env.embed_endpoint.empty() || !ng) return std::nullopt;

    test::TempDir dir;
    const auto loaded = corpus::load_20newsgroups(ng);
    const std::size_t total = loaded.documents.size();
    std::string jsonl;
    for (std::size_t i = 0; i < 200 && i < total; ++i) {
        const auto& d = loaded.documents[i * total / 200];
        jsonl += json{{"id", d.id}, {"text", d.text}}.dump() + "\n";
    }
    test::write(dir.path() / "subset.jsonl", jsonl);
    json cfg = json::parse(test::read(kData / "example_config.json"));
    cfg["corpus"]["path"] = (dir.path() / "subset.jsonl").string();
    cfg["provider"] = {{"kind", "http"},
                       {"model", std::getenv("QUALIT_CHAT_MODEL") ? std::getenv("QUALIT_CHAT_MODEL") : "claude-2.1"},
                       {"adapter", std::getenv("QUALIT_CHAT_ADAPTER") ? std::getenv("QUALIT_CHAT_ADAPTER") : "anthropic"}};
    cfg["embedder"] = {{"kind", "http"},
                       {"model", std::getenv("QUALIT_EMBED_MODEL") ? std::getenv("QUALIT_EMBED_MODEL") : "titan-embed"},
                       {"adapter", std::getenv("QUALIT_EMBED_ADAPTER") ? std::getenv("QUALIT_EMBED_ADAPTER") : "titan"}};
    test::write(dir.path() / "live.json", cfg.dump(2));
    int code = 0;
    const fs::path run = dir.path() / run_cli("run live.json --dump-hierarchy", dir.path(), code);
    if (code != 0) return Verdict{false, "exit code " + std::to_string(code)};
    const auto report = json::parse(test::read(run / "report.json"));
    const double tc = report["rows"][0]["topic_coherence"].get<double>();
    const double td = report["rows"][0]["topic_diversity"].get<double>();
    const int k = report["rows"][0]["k"].get<int>();
    // Degenerate baseline: the same corpus-wide top-10 list repeated for
    // every topic, so its diversity is 1/k.
    const double baseline_td = 1.0 / k;
    const bool ok = tc >= -1.0 && tc <= 1.0 && td >= 0.0 && td <= 1.0 && td > baseline_td;
    return Verdict{ok, "k=" + std::to_string(k) + " TC=" + eval::format_percent(tc) + "% TD=" +
                           eval::format_percent(td) + "% vs degenerate TD=" + eval::format_percent(baseline_td) + "%"};
}

}  // namespace

int main() {
    logger()->set_level(spdlog::level::off);
    report("silhouette-oracle", silhouette_oracle, kSilhouetteBudgetS);
    report("kmeans-sanity", kmeans_sanity, kKMeansBudgetS);
    report("select-k-recovery", select_k_recovery, kSelectBudgetS);
    report("npmi-oracle", npmi_oracle);
    report("topic-diversity-exact", topic_diversity_exact);
    report("hallucination-filter", hallucination_filter);
    report("end-to-end-determinism", end_to_end, kEndToEndBudgetS);
    report("sweep-structure", sweep_structure);
    report("agreement-arithmetic", agreement_arithmetic);

    std::optional<Verdict> live;
    try {
        live = live_smoke();
    } catch (const std::exception& e) {
        live = Verdict{false, std::string("exception: ") + e.what()};
    }
    if (!live) {
        std::cout << "SKIP live-smoke (optional; needs QUALIT_PROVIDER_ENDPOINT, QUALIT_EMBED_ENDPOINT, QUALIT_20NG_DIR)"
                  << std::endl;
    } else {
        std::cout << (live->pass ? "PASS " : "FAIL ") << "live-smoke (" << live->detail << ")" << std::endl;
        if (!live->pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
