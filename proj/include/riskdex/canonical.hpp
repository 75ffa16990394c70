#pragma once

#include "riskdex/error.hpp"
#include "riskdex/stats.hpp"

#include <vector>

namespace riskdex {

struct CanonicalPair {
    Vector a; // weights over X columns
    Vector b; // weights over Y columns
    double rho = 0.0;
};

/// Canonical correlation between an n x K matrix X and an n x M matrix Y.
/// pairs[0] is the leading pair; every variate has unit in-sample variance.
struct CanonicalSolution {
    std::vector<CanonicalPair> pairs;
    bool ridge_applied = false;

    [[nodiscard]] const CanonicalPair &first() const { return pairs.front(); }
    [[nodiscard]] double rho() const { return pairs.front().rho; }
};

/// Condition number above which a ridge of 1e-10 * trace is added to a block.
inline constexpr double kRidgeCondition = 1e12;

CanonicalSolution cca(const Matrix &x, const Matrix &y);

/// w_k = a_k / sum(a). Negative entries are kept; a NegativeWeight warning is
/// appended to `warnings` (stage "cca") when given.
Vector normalized_weights(const Vector &coefficients, Warnings *warnings = nullptr,
                          std::string_view label = "weights");

inline Vector factor_weights(const Vector &a, Warnings *warnings = nullptr) {
    return normalized_weights(a, warnings, "factor weights");
}

inline Vector hazard_weights(const Vector &b, Warnings *warnings = nullptr) {
    return normalized_weights(b, warnings, "hazard weights");
}

} // namespace riskdex
