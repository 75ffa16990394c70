#include "riskdex/regression.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace riskdex {
namespace {

Matrix with_intercept(const Matrix &z) {
    Matrix design(z.rows(), z.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(z.cols()) = z;
    return design;
}

// Residuals of Y regressed on the design; throws RankDeficientDesign.
Matrix residuals_of(const Matrix &design, const Matrix &y, Matrix *coefficients = nullptr) {
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < design.cols()) {
        throw Error(ErrorCode::RankDeficientDesign,
                    "design has rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(design.cols()));
    }
    Matrix b = qr.solve(y);
    Matrix e = y - design * b;
    if (coefficients != nullptr) {
        *coefficients = std::move(b);
    }
    return e;
}

double log_det_spd(const Matrix &s) {
    const Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularResidualCrossProduct,
                    "residual cross-product matrix is not positive definite");
    }
    const Vector diag = Matrix(llt.matrixL()).diagonal();
    if (diag.minCoeff() <= 0.0) {
        throw Error(ErrorCode::SingularResidualCrossProduct, "residual cross-product is singular");
    }
    return 2.0 * diag.array().log().sum();
}

void check_shapes(const Matrix &z, const Matrix &y) {
    if (z.rows() != y.rows()) {
        throw Error(ErrorCode::InsufficientRows, "Z and Y have different row counts");
    }
    if (y.cols() < 1) {
        throw Error(ErrorCode::InsufficientRows, "no response columns");
    }
    if (z.rows() <= z.cols() + 1) {
        throw Error(ErrorCode::InsufficientRows,
                    "need n > r + 1 (n=" + std::to_string(z.rows()) +
                        ", r=" + std::to_string(z.cols()) + ")");
    }
}

} // namespace

MvRegressionFit fit_mv_regression(const Matrix &z, const Matrix &y) {
    check_shapes(z, y);
    const Matrix design = with_intercept(z);

    MvRegressionFit fit;
    fit.n = z.rows();
    fit.r = z.cols();
    fit.m = y.cols();
    fit.residuals = residuals_of(design, y, &fit.coefficients);
    fit.residual_covariance =
        fit.residuals.transpose() * fit.residuals / static_cast<double>(fit.n - fit.r - 1);
    fit.design_inverse = (design.transpose() * design).ldlt().solve(
        Matrix::Identity(design.cols(), design.cols()));

    const Matrix centered = y.rowwise() - y.colwise().mean();
    fit.r_squared.resize(fit.m);
    for (Eigen::Index j = 0; j < fit.m; ++j) {
        const double sst = centered.col(j).squaredNorm();
        const double sse = fit.residuals.col(j).squaredNorm();
        fit.r_squared(j) = sst > 0.0 ? 1.0 - sse / sst : 1.0;
    }
    return fit;
}

RaoF rao_f(double wilks_lambda, double m, double q, double error_df) {
    RaoF out;
    const double a = m * m * q * q - 4.0;
    const double b = m * m + q * q - 5.0;
    const double t = (a > 0.0 && b > 0.0) ? std::sqrt(a / b) : 1.0;
    const double w = error_df + q - (m + q + 1.0) / 2.0;
    out.df1 = m * q;
    out.df2 = w * t - (m * q) / 2.0 + 1.0;
    const double root = std::pow(std::clamp(wilks_lambda, 0.0, 1.0), 1.0 / t);
    out.f = root > 0.0 ? (1.0 - root) / root * (out.df2 / out.df1)
                       : std::numeric_limits<double>::infinity();
    out.p_value = std::isinf(out.f) ? 0.0 : stats::f_upper_tail(out.f, out.df1, out.df2);
    return out;
}

std::vector<ManovaRow> manova_per_predictor(const Matrix &z, const Matrix &y,
                                            std::span<const std::string> predictor_names) {
    check_shapes(z, y);
    if (predictor_names.size() != static_cast<std::size_t>(z.cols())) {
        throw Error(ErrorCode::ColumnMismatch, "predictor names do not match Z columns");
    }
    const Matrix design = with_intercept(z);
    const Matrix e_full = residuals_of(design, y);
    const Matrix sscp_full = e_full.transpose() * e_full;
    const double log_det_full = log_det_spd(sscp_full);
    const auto m = static_cast<double>(y.cols());
    const auto error_df = static_cast<double>(z.rows() - z.cols() - 1);

    std::vector<ManovaRow> rows;
    rows.reserve(predictor_names.size());
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        Matrix reduced(design.rows(), design.cols() - 1);
        reduced.leftCols(j + 1) = design.leftCols(j + 1);
        reduced.rightCols(design.cols() - j - 2) = design.rightCols(design.cols() - j - 2);
        const Matrix e_reduced = residuals_of(reduced, y);
        const Matrix sscp_reduced = e_reduced.transpose() * e_reduced;

        ManovaRow row;
        row.predictor = predictor_names[static_cast<std::size_t>(j)];
        row.wilks_lambda = std::min(1.0, std::exp(log_det_full - log_det_spd(sscp_reduced)));
        const RaoF f = rao_f(row.wilks_lambda, m, 1.0, error_df);
        row.f_approx = std::max(0.0, f.f);
        row.df1 = f.df1;
        row.df2 = f.df2;
        row.p_value = std::clamp(f.p_value, 0.0, 1.0);
        const Matrix hypothesis = sscp_reduced - sscp_full;
        row.pillai_trace = sscp_reduced.ldlt().solve(hypothesis).trace();
        row.significant_05 = row.p_value < 0.05;
        row.significant_10 = row.p_value < 0.10;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CoefficientTest> coefficient_tests(const MvRegressionFit &fit,
                                               std::span<const std::string> predictor_names,
                                               std::span<const std::string> response_names) {
    std::vector<CoefficientTest> out;
    const double df = fit.error_df();
    for (Eigen::Index k = 0; k < fit.m; ++k) {
        for (Eigen::Index j = 0; j < fit.r; ++j) {
            CoefficientTest test;
            test.predictor = predictor_names[static_cast<std::size_t>(j)];
            test.response = response_names[static_cast<std::size_t>(k)];
            test.estimate = fit.coefficients(j + 1, k);
            test.std_error =
                std::sqrt(std::max(0.0, fit.residual_covariance(k, k) * fit.design_inverse(j + 1, j + 1)));
            if (test.std_error > 0.0) {
                test.t = test.estimate / test.std_error;
                test.p_value = stats::t_two_sided(test.t, df);
            } else {
                test.t = 0.0;
                test.p_value = test.estimate == 0.0 ? 1.0 : 0.0;
            }
            out.push_back(std::move(test));
        }
    }
    return out;
}

std::string format_p_value(double p) {
    std::string text = p < 0.0001 ? std::string("<0.0001") : fmt::format("{:.4f}", p);
    if (p < 0.05) {
        text += "*";
    } else if (p < 0.10) {
        text += "**";
    }
    return text;
}

std::string render_significance_table(std::span<const ManovaRow> rows, const FactorSpec &spec) {
    std::size_t factor_width = std::string_view("factor").size();
    std::size_t variable_width = std::string_view("indicator").size();
    for (const auto &block : spec.factors) {
        factor_width = std::max(factor_width, block.name.size());
        for (const auto &id : block.indicators) {
            variable_width = std::max(variable_width, id.size());
        }
    }
    std::string out = fmt::format("{:<{}}  {:<{}}  {}\n", "factor", factor_width, "indicator",
                                  variable_width, "manova_p");
    for (const auto &block : spec.factors) {
        bool first = true;
        for (const auto &id : block.indicators) {
            const auto it = std::find_if(rows.begin(), rows.end(),
                                         [&](const ManovaRow &r) { return r.predictor == id; });
            const std::string cell = it == rows.end() ? std::string("-") : format_p_value(it->p_value);
            out += fmt::format("{:<{}}  {:<{}}  {}\n", first ? block.name : std::string{}, factor_width,
                               id, variable_width, cell);
            first = false;
        }
    }
    out += "\n* p < 0.05   ** 0.05 <= p < 0.10\n";
    return out;
}

} // namespace riskdex
