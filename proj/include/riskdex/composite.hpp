#pragma once

#include "riskdex/error.hpp"
#include "riskdex/stats.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskdex {

/// Weighted sum of the columns of `scores` (regions x K). Throws
/// WeightMismatch when the weight count differs from K or the weights do not
/// sum to one within 1e-8.
Vector composite_index(const Matrix &scores, const Vector &weights);

/// Same contract as composite_index, over normalised hazard columns.
Vector hazard_index(const Matrix &normalized_hazards, const Vector &weights);

struct KMeans1D {
    std::vector<int> assignment; // cluster per input value, 0 = lowest centre
    std::vector<double> centers; // ascending
    double wcss = 0.0;
};

/// Globally optimal 1D k-means by dynamic programming over the sorted values.
/// Equal values always share a cluster. Throws TooFewDistinctValues when
/// there are fewer than `groups` distinct values.
KMeans1D kmeans_1d(std::span<const double> values, int groups);

/// Pearson r between the two indices, optionally restricted to regions whose
/// tag equals `subset`. Throws EmptySubset (fewer than 3 regions selected) or
/// DegenerateVariance.
double correlation_diagnostic(std::span<const double> risk, std::span<const double> hazard,
                              std::span<const std::optional<std::string>> tags = {},
                              const std::optional<std::string> &subset = std::nullopt);

struct RiskScores {
    std::vector<std::string> regions;
    std::vector<std::string> factor_names;
    Matrix factor_scores; // regions x factors
    Vector risk_index;
    Vector hazard_index;
    std::vector<int> rank; // 1..G, higher is riskier
    std::vector<double> centers;
};

inline constexpr int kDefaultBins = 5;

} // namespace riskdex
