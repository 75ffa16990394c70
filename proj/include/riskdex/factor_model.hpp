#pragma once

#include "riskdex/error.hpp"
#include "riskdex/preprocess.hpp"
#include "riskdex/stats.hpp"

#include <string>
#include <vector>

namespace riskdex {

struct FactorBlock {
    std::string name;
    std::vector<std::string> indicators;
};

/// Independent-clusters measurement layout: each indicator loads on exactly
/// one named factor. Hazard columns are the observed outcome counts.
struct FactorSpec {
    std::vector<FactorBlock> factors;
    std::vector<std::string> hazard_columns;

    /// Throws InvalidConfig on duplicates, overlap with hazards, or a factor
    /// with fewer than two indicators.
    void validate() const;
    [[nodiscard]] std::vector<std::string> indicators() const;
    [[nodiscard]] std::vector<std::string> factor_names() const;
};

enum class FitMethod { maximum_likelihood, principal_axis };

std::string_view to_string(FitMethod method) noexcept;

struct FitOptions {
    FitMethod method = FitMethod::maximum_likelihood;
    /// Refit a non-converged ML block with principal axis instead of failing.
    bool principal_axis_fallback = true;
    int max_iterations = 500;
    double tolerance = 1e-8;
    double heywood_tolerance = 1e-6;
};

struct SingleFactorFit {
    Vector loadings;
    Vector communalities; // lambda^2, the variance each indicator shares with the factor
    Vector uniquenesses;  // 1 - lambda^2
    FitMethod method = FitMethod::maximum_likelihood;
    int iterations = 0;
    bool converged = false;
    bool heywood = false;
    bool degenerate = false;
    /// ML discrepancy ln|Sigma| + tr(Sigma^-1 R) - ln|R| - p and the matching
    /// log-likelihood ratio against the saturated model, -(n-1)/2 * discrepancy.
    double discrepancy = 0.0;
    double log_likelihood = 0.0;
};

/// One-factor model on a correlation matrix estimated from `n` rows.
SingleFactorFit fit_single_factor_correlation(const Matrix &correlation, Eigen::Index n,
                                              const FitOptions &options = {});

/// One-factor model on the columns of an n x J block.
SingleFactorFit fit_single_factor(const Matrix &block, const FitOptions &options = {});

struct IndicatorWeights {
    Vector raw;     // (lambda_j / sum lambda) * (sigma2_j / sum sigma2)
    Vector weights; // raw renormalised to sum to one
};

IndicatorWeights indicator_weights(const Vector &loadings, const Vector &explained_variances);

struct FactorFit {
    std::string name;
    std::vector<std::string> indicators;
    SingleFactorFit fit;
    IndicatorWeights weights;
};

struct FactorModel {
    std::vector<FactorFit> factors;

    [[nodiscard]] const FactorFit &factor(std::string_view name) const;
};

/// Fits every block of `spec` on the normalised table. Heywood, degenerate and
/// fallback events are appended to `warnings` when given.
FactorModel fit_factor_model(const NormalizedTable &normalized, const FactorSpec &spec,
                             const FitOptions &options = {}, Warnings *warnings = nullptr);

struct FactorScores {
    std::vector<std::string> factor_names;
    Matrix scores; // regions x factors
};

FactorScores factor_scores(const NormalizedTable &normalized, const FactorSpec &spec,
                           const FactorModel &model);

} // namespace riskdex
