#include "riskdex/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace riskdex {
namespace {

Vector weighted_sum(const Matrix &columns, const Vector &weights, const char *what) {
    if (weights.size() != columns.cols()) {
        throw Error(ErrorCode::WeightMismatch, std::string(what) + ": " +
                                                   std::to_string(weights.size()) + " weights for " +
                                                   std::to_string(columns.cols()) + " columns");
    }
    if (!weights.allFinite() || std::abs(weights.sum() - 1.0) > 1e-8) {
        throw Error(ErrorCode::WeightMismatch, std::string(what) + ": weights do not sum to one");
    }
    return columns * weights;
}

} // namespace

Vector composite_index(const Matrix &scores, const Vector &weights) {
    return weighted_sum(scores, weights, "composite index");
}

Vector hazard_index(const Matrix &normalized_hazards, const Vector &weights) {
    return weighted_sum(normalized_hazards, weights, "hazard index");
}

KMeans1D kmeans_1d(std::span<const double> values, int groups) {
    const auto n = values.size();
    if (groups < 1) {
        throw Error(ErrorCode::TooFewDistinctValues, "need at least one group");
    }
    const auto g_count = static_cast<std::size_t>(groups);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = values[order[i]];
        if (!std::isfinite(x[i])) {
            throw Error(ErrorCode::TooFewDistinctValues, "non-finite value in k-means input");
        }
    }
    std::size_t distinct = n == 0 ? 0 : 1;
    for (std::size_t i = 1; i < n; ++i) {
        distinct += x[i] > x[i - 1] ? 1 : 0;
    }
    if (distinct < g_count) {
        throw Error(ErrorCode::TooFewDistinctValues, std::to_string(distinct) +
                                                         " distinct values for " +
                                                         std::to_string(groups) + " groups");
    }

    // cost[i][j]: within-cluster sum of squares of x[i..j], accumulated with
    // Welford updates for stability.
    std::vector<double> cost(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        double m2 = 0.0;
        for (std::size_t j = i; j < n; ++j) {
            const double count = static_cast<double>(j - i + 1);
            const double delta = x[j] - mean;
            mean += delta / count;
            m2 += delta * (x[j] - mean);
            cost[i * n + j] = m2;
        }
    }
    // A cluster may only start at i when x[i-1] < x[i], so ties never split.
    auto can_start = [&](std::size_t i) { return i == 0 || x[i - 1] < x[i]; };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(g_count, std::vector<double>(n, inf));
    std::vector<std::vector<std::size_t>> start(g_count, std::vector<std::size_t>(n, 0));
    for (std::size_t j = 0; j < n; ++j) {
        best[0][j] = cost[j];
    }
    for (std::size_t g = 1; g < g_count; ++g) {
        for (std::size_t j = g; j < n; ++j) {
            for (std::size_t i = g; i <= j; ++i) {
                if (!can_start(i) || best[g - 1][i - 1] == inf) {
                    continue;
                }
                const double candidate = best[g - 1][i - 1] + cost[i * n + j];
                if (candidate < best[g][j]) {
                    best[g][j] = candidate;
                    start[g][j] = i;
                }
            }
        }
    }

    std::vector<int> sorted_cluster(n, 0);
    std::size_t end = n;
    for (std::size_t g = g_count; g-- > 0;) {
        const std::size_t begin = g == 0 ? 0 : start[g][end - 1];
        for (std::size_t i = begin; i < end; ++i) {
            sorted_cluster[i] = static_cast<int>(g);
        }
        end = begin;
    }

    KMeans1D result;
    result.assignment.assign(n, 0);
    result.centers.assign(g_count, 0.0);
    std::vector<std::size_t> sizes(g_count, 0);
    for (std::size_t i = 0; i < n; ++i) {
        result.assignment[order[i]] = sorted_cluster[i];
        result.centers[static_cast<std::size_t>(sorted_cluster[i])] += x[i];
        ++sizes[static_cast<std::size_t>(sorted_cluster[i])];
    }
    for (std::size_t g = 0; g < g_count; ++g) {
        result.centers[g] /= static_cast<double>(sizes[g]);
    }
    std::vector<double> within(g_count, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = static_cast<std::size_t>(sorted_cluster[i]);
        const double d = x[i] - result.centers[g];
        within[g] += d * d;
    }
    for (const double w : within) {
        result.wcss += w;
    }
    return result;
}

double correlation_diagnostic(std::span<const double> risk, std::span<const double> hazard,
                              std::span<const std::optional<std::string>> tags,
                              const std::optional<std::string> &subset) {
    if (risk.size() != hazard.size()) {
        throw Error(ErrorCode::WeightMismatch, "risk and hazard indices differ in length");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < risk.size(); ++i) {
        if (subset) {
            if (i >= tags.size() || !tags[i] || *tags[i] != *subset) {
                continue;
            }
        }
        x.push_back(risk[i]);
        y.push_back(hazard[i]);
    }
    if (x.size() < 3) {
        throw Error(ErrorCode::EmptySubset,
                    "need at least 3 regions" + (subset ? " tagged '" + *subset + "'" : std::string{}));
    }
    const double r = stats::pearson(x, y);
    if (std::isnan(r)) {
        throw Error(ErrorCode::DegenerateVariance, "an index is constant over the selection");
    }
    return r;
}

} // namespace riskdex
