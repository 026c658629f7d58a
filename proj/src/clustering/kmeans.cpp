#include "qualit/clustering.hpp"
#include "qualit/error.hpp"
#include "qualit/kernels.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qualit::clustering {

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    PointSet ps(rows.front().size());
    for (const auto& r : rows) ps.push_back(r);
    return ps;
}

PointSet PointSet::from_phrases(std::span<const keyphrase::KeyPhrase> phrases) {
    if (phrases.empty()) return {};
    PointSet ps(phrases.front().embedding.dims());
    for (const auto& p : phrases) ps.push_back(p.embedding.values());
    return ps;
}

void PointSet::push_back(std::span<const double> row) {
    if (dims_ == 0) dims_ = row.size();
    if (row.size() != dims_ || dims_ == 0) {
        throw InputError("point dimension mismatch: expected " + std::to_string(dims_) + ", got " +
                         std::to_string(row.size()));
    }
    data_.insert(data_.end(), row.begin(), row.end());
}

PointSet PointSet::subset(std::span<const std::size_t> indices) const {
    PointSet out(dims_);
    for (std::size_t i : indices) out.push_back(row(i));
    return out;
}

PointSet PointSet::scaled(double factor) const {
    PointSet out = *this;
    for (double& x : out.data_) x *= factor;
    return out;
}

namespace {

// 53-bit uniform in [0, 1); independent of the standard library's
// distribution implementations so results match across toolchains.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<std::vector<double>> seed_plus_plus(const PointSet& points, int k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<std::size_t> chosen;
    std::vector<bool> is_chosen(n, false);
    auto pick = [&](std::size_t idx) {
        chosen.push_back(idx);
        is_chosen[idx] = true;
    };
    pick(std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n))));

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = kernels::squared_l2(points.row(i), points.row(chosen[0]));

    while (chosen.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t next = n;
        if (total > 0.0) {
            const double r = uniform01(rng) * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                cum += d2[i];
                next = i;
                if (cum > r) break;
            }
        } else {
            // All remaining points coincide with a center; the duplicates
            // are resolved by empty-cluster repair.
            for (std::size_t i = 0; i < n && next == n; ++i) {
                if (!is_chosen[i]) next = i;
            }
            if (next == n) next = 0;
        }
        pick(next);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], kernels::squared_l2(points.row(i), points.row(next)));
        }
    }

    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    for (std::size_t idx : chosen) centroids.emplace_back(points.row(idx).begin(), points.row(idx).end());
    return centroids;
}

double inertia_of(const PointSet& points, const std::vector<int>& assign,
                  const std::vector<std::vector<double>>& centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        total += kernels::squared_l2(points.row(i), centroids[assign[i]]);
    }
    return total;
}

}  // namespace

KMeansResult kmeans(const PointSet& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
    const std::size_t n = points.size();
    if (k < 1) throw InputError("k must be >= 1");
    if (static_cast<std::size_t>(k) > n) {
        throw InputError("k (" + std::to_string(k) + ") exceeds the number of points (" + std::to_string(n) + ")");
    }
    std::mt19937_64 rng(seed);
    KMeansResult res;
    res.seed = seed;
    res.centroids = seed_plus_plus(points, k, rng);
    res.assignments.assign(n, -1);
    const std::size_t dims = points.dims();
    std::vector<std::size_t> sizes(k, 0);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        bool changed = false;
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int current = res.assignments[i];
            int best = current < 0 ? 0 : current;
            double best_d = kernels::squared_l2(points.row(i), res.centroids[best]);
            for (int c = 0; c < k; ++c) {
                if (c == best) continue;
                const double d = kernels::squared_l2(points.row(i), res.centroids[c]);
                if (d < best_d) {
                    best = c;
                    best_d = d;
                }
            }
            if (best != current) changed = true;
            res.assignments[i] = best;
            ++sizes[best];
        }

        for (int empty = 0; empty < k; ++empty) {
            if (sizes[empty] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[res.assignments[i]] < 2) continue;
                const double d = kernels::squared_l2(points.row(i), res.centroids[res.assignments[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --sizes[res.assignments[far]];
            res.assignments[far] = empty;
            sizes[empty] = 1;
            res.centroids[empty].assign(points.row(far).begin(), points.row(far).end());
            changed = true;
        }

        for (auto& c : res.centroids) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) kernels::accumulate(res.centroids[res.assignments[i]], points.row(i));
        for (int c = 0; c < k; ++c) {
            const double count = static_cast<double>(sizes[c]);
            for (std::size_t j = 0; j < dims; ++j) res.centroids[c][j] /= count;
        }

        res.inertia = inertia_of(points, res.assignments, res.centroids);
        res.inertia_trace.push_back(res.inertia);
        res.iterations_run = iter + 1;
        if (!changed) break;
    }
    return res;
}

}  // namespace qualit::clustering
