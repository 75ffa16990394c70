#pragma once

#include "riskdex/factor_model.hpp"
#include "riskdex/stats.hpp"

#include <span>
#include <string>
#include <vector>

namespace riskdex {

/// Least-squares fit of Y (n x m) on [1 | Z] (Z is n x r).
struct MvRegressionFit {
    Matrix coefficients;        // (r + 1) x m, intercept row first
    Matrix residuals;           // n x m
    Matrix residual_covariance; // E'E / (n - r - 1)
    Matrix design_inverse;      // (Z~'Z~)^{-1}
    Eigen::Index n = 0;
    Eigen::Index r = 0;
    Eigen::Index m = 0;
    Vector r_squared; // per response

    [[nodiscard]] double error_df() const noexcept { return static_cast<double>(n - r - 1); }
};

/// Rank tolerance for the pivoted QR of the design matrix.
inline constexpr double kRankTolerance = 1e-10;

MvRegressionFit fit_mv_regression(const Matrix &z, const Matrix &y);

struct ManovaRow {
    std::string predictor;
    double wilks_lambda = 1.0;
    double f_approx = 0.0;
    double df1 = 0.0;
    double df2 = 0.0;
    double p_value = 1.0;
    double pillai_trace = 0.0;
    bool significant_05 = false;
    bool significant_10 = false;
};

/// Rao's F approximation to Wilks' lambda for m responses, q hypothesis
/// degrees of freedom and `error_df` residual degrees of freedom.
struct RaoF {
    double f = 0.0;
    double df1 = 0.0;
    double df2 = 0.0;
    double p_value = 1.0;
};
RaoF rao_f(double wilks_lambda, double m, double q, double error_df);

/// Type III test of each predictor: the full model against the model with
/// that predictor dropped. Rows follow the column order of `z`.
std::vector<ManovaRow> manova_per_predictor(const Matrix &z, const Matrix &y,
                                            std::span<const std::string> predictor_names);

struct CoefficientTest {
    std::string predictor;
    std::string response;
    double estimate = 0.0;
    double std_error = 0.0;
    double t = 0.0;
    double p_value = 1.0;
};

/// Per-response t tests of every slope (intercept excluded).
std::vector<CoefficientTest> coefficient_tests(const MvRegressionFit &fit,
                                               std::span<const std::string> predictor_names,
                                               std::span<const std::string> response_names);

/// "0.0033*", "0.0526**", "0.7442", "<0.0001*".
std::string format_p_value(double p);

/// Text table of MANOVA p-values grouped by factor in spec order.
std::string render_significance_table(std::span<const ManovaRow> rows, const FactorSpec &spec);

} // namespace riskdex
