#include "qualit/clustering.hpp"
#include "qualit/error.hpp"
#include "qualit/kernels.hpp"
#include "qualit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace qualit::clustering {

DistanceMatrix::DistanceMatrix(const PointSet& points) : n_(points.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double d = std::sqrt(kernels::squared_l2(points.row(i), points.row(j)));
            d_[i * n_ + j] = d;
            d_[j * n_ + i] = d;
        }
    }
}

SilhouetteStats silhouette(const PointSet& points, std::span<const int> assignments) {
    if (assignments.size() != points.size()) {
        throw InputError("assignment length " + std::to_string(assignments.size()) + " does not match " +
                         std::to_string(points.size()) + " points");
    }
    return silhouette(DistanceMatrix(points), assignments);
}

SilhouetteStats silhouette(const DistanceMatrix& distances, std::span<const int> assignments) {
    const std::size_t n = distances.size();
    if (assignments.size() != n) {
        throw InputError("assignment length " + std::to_string(assignments.size()) + " does not match " +
                         std::to_string(n) + " points");
    }
    // Dense relabelling so arbitrary cluster ids work.
    std::map<int, std::size_t> dense;
    for (int a : assignments) dense.emplace(a, 0);
    std::size_t next = 0;
    for (auto& [label, idx] : dense) idx = next++;
    const std::size_t clusters = dense.size();
    std::vector<std::size_t> label(n);
    std::vector<std::size_t> sizes(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
        label[i] = dense[assignments[i]];
        ++sizes[label[i]];
    }

    SilhouetteStats stats;
    stats.per_point.assign(n, 0.0);
    std::vector<double> sums(clusters);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = label[i];
        if (sizes[own] <= 1 || clusters < 2) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) sums[label[j]] += distances(i, j);
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < clusters; ++c) {
            if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        stats.per_point[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    double total = 0.0;
    for (double s : stats.per_point) total += s;
    stats.mean = n == 0 ? 0.0 : total / static_cast<double>(n);
    return stats;
}

int default_k_max(std::size_t n, int ceiling) {
    const auto by_length = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(n) / 2.0)));
    long long k = std::min<long long>({static_cast<long long>(ceiling), by_length, static_cast<long long>(n) - 1});
    return static_cast<int>(std::max<long long>(k, 2));
}

SelectionResult select_k(const PointSet& points, int k_min, std::optional<int> k_max, std::uint64_t seed,
                         int workers, int k_ceiling) {
    const std::size_t n = points.size();
    if (n < 3) throw InputError("too few points for model selection");
    const int hi = k_max.value_or(default_k_max(n, k_ceiling));
    if (k_min < 2 || k_min > hi || static_cast<std::size_t>(hi) > n - 1) {
        throw InputError("invalid k range [" + std::to_string(k_min) + ", " + std::to_string(hi) + "] for " +
                         std::to_string(n) + " points");
    }
    const DistanceMatrix distances(points);
    const auto count = static_cast<std::size_t>(hi - k_min + 1);
    auto runs = parallel_map(count, workers, [&](std::size_t i) {
        const int k = k_min + static_cast<int>(i);
        KMeansResult km = kmeans(points, k, seed);
        const double score = silhouette(distances, km.assignments).mean;
        return std::pair<KMeansResult, double>(std::move(km), score);
    });

    SelectionResult out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out.diagnostics.push_back(KDiagnostic{k_min + static_cast<int>(i), runs[i].second});
        if (runs[i].second > runs[best].second) best = i;
    }
    out.k = k_min + static_cast<int>(best);
    out.best = std::move(runs[best].first);
    return out;
}

}  // namespace qualit::clustering
