#include "riskdex/factor_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace riskdex {
namespace {

constexpr double kZeroLoading = 1e-8;

// Squared multiple correlation of each variable with all the others.
Vector squared_multiple_correlations(const Matrix &r) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
    const Vector values = eig.eigenvalues().cwiseMax(1e-12).cwiseInverse();
    const Matrix inv = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    return (Vector::Ones(r.rows()) - inv.diagonal().cwiseInverse()).cwiseMax(0.0);
}

std::pair<double, Vector> leading_eigenpair(const Matrix &m) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const auto last = m.rows() - 1;
    return {eig.eigenvalues()(last), eig.eigenvectors().col(last)};
}

void finish(SingleFactorFit &fit, const Matrix &r, Eigen::Index n, const FitOptions &options) {
    Vector &lambda = fit.loadings;
    if (lambda.cwiseAbs().maxCoeff() < kZeroLoading) {
        lambda.setZero();
        fit.degenerate = true;
    }
    const double ceiling = std::sqrt(1.0 - options.heywood_tolerance);
    for (Eigen::Index j = 0; j < lambda.size(); ++j) {
        if (std::abs(lambda(j)) > ceiling) {
            lambda(j) = std::copysign(ceiling, lambda(j));
            fit.heywood = true;
        }
    }
    if (lambda.sum() < 0.0) {
        lambda = -lambda;
    }
    fit.communalities = lambda.cwiseAbs2();
    fit.uniquenesses = Vector::Ones(lambda.size()) - fit.communalities;

    const Matrix sigma = lambda * lambda.transpose() + Matrix(fit.uniquenesses.asDiagonal());
    const Eigen::LDLT<Matrix> sigma_ldlt(sigma);
    const Eigen::SelfAdjointEigenSolver<Matrix> r_eig(r, Eigen::EigenvaluesOnly);
    const double log_det_sigma = sigma_ldlt.vectorD().array().log().sum();
    const double log_det_r = r_eig.eigenvalues().cwiseMax(1e-300).array().log().sum();
    const double trace = sigma_ldlt.solve(r).trace();
    fit.discrepancy = std::max(0.0, log_det_sigma + trace - log_det_r - static_cast<double>(r.rows()));
    fit.log_likelihood = -0.5 * static_cast<double>(n - 1) * fit.discrepancy;
}

SingleFactorFit fit_maximum_likelihood(const Matrix &r, const FitOptions &options) {
    const auto p = r.rows();
    SingleFactorFit fit;
    fit.method = FitMethod::maximum_likelihood;

    Vector psi = (Vector::Ones(p) - squared_multiple_correlations(r))
                     .cwiseMax(options.heywood_tolerance)
                     .cwiseMin(1.0);
    Vector lambda = Vector::Zero(p);
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        // Given Psi, the ML loadings are Psi^{1/2} v sqrt(theta - 1) for the
        // leading eigenpair of Psi^{-1/2} R Psi^{-1/2}; given the loadings, Psi
        // must reproduce the unit diagonal of R.
        const Vector root = psi.cwiseSqrt();
        const Vector inv_root = root.cwiseInverse();
        const Matrix scaled = inv_root.asDiagonal() * r * inv_root.asDiagonal();
        auto [theta, v] = leading_eigenpair(scaled);
        if (v.sum() < 0.0) {
            v = -v;
        }
        const Vector next_lambda = root.cwiseProduct(v) * std::sqrt(std::max(theta - 1.0, 0.0));
        const Vector next_psi = (Vector::Ones(p) - next_lambda.cwiseAbs2())
                                    .cwiseMax(options.heywood_tolerance)
                                    .cwiseMin(1.0);
        const double change = std::max((next_psi - psi).cwiseAbs().maxCoeff(),
                                       (next_lambda - lambda).cwiseAbs().maxCoeff());
        psi = next_psi;
        lambda = next_lambda;
        fit.iterations = iter;
        if (change < options.tolerance) {
            fit.converged = true;
            break;
        }
    }
    fit.loadings = lambda;
    return fit;
}

SingleFactorFit fit_principal_axis(const Matrix &r, const FitOptions &options) {
    const auto p = r.rows();
    SingleFactorFit fit;
    fit.method = FitMethod::principal_axis;

    Vector h2 = squared_multiple_correlations(r);
    Vector lambda = Vector::Zero(p);
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        Matrix reduced = r;
        reduced.diagonal() = h2;
        auto [theta, v] = leading_eigenpair(reduced);
        if (v.sum() < 0.0) {
            v = -v;
        }
        const Vector next_lambda = v * std::sqrt(std::max(theta, 0.0));
        const Vector next_h2 = next_lambda.cwiseAbs2().cwiseMin(1.0);
        const double change = (next_lambda - lambda).cwiseAbs().maxCoeff();
        lambda = next_lambda;
        h2 = next_h2;
        fit.iterations = iter;
        if (change < options.tolerance) {
            fit.converged = true;
            break;
        }
    }
    fit.loadings = lambda;
    return fit;
}

} // namespace

std::string_view to_string(FitMethod method) noexcept {
    return method == FitMethod::principal_axis ? "principal_axis" : "maximum_likelihood";
}

void FactorSpec::validate() const {
    if (factors.empty()) {
        throw Error(ErrorCode::InvalidConfig, "no factors defined");
    }
    std::set<std::string> names;
    std::set<std::string> seen;
    for (const auto &block : factors) {
        if (!names.insert(block.name).second) {
            throw Error(ErrorCode::InvalidConfig, "factor '" + block.name + "' defined twice");
        }
        if (block.indicators.size() < 2) {
            throw Error(ErrorCode::InvalidConfig,
                        "factor '" + block.name + "' needs at least two indicators");
        }
        for (const auto &id : block.indicators) {
            if (!seen.insert(id).second) {
                throw Error(ErrorCode::InvalidConfig,
                            "indicator '" + id + "' assigned to more than one factor");
            }
        }
    }
    if (hazard_columns.empty()) {
        throw Error(ErrorCode::InvalidConfig, "no hazard columns defined");
    }
    std::set<std::string> hazards;
    for (const auto &id : hazard_columns) {
        if (seen.contains(id)) {
            throw Error(ErrorCode::InvalidConfig, "column '" + id + "' is both indicator and hazard");
        }
        if (!hazards.insert(id).second) {
            throw Error(ErrorCode::InvalidConfig, "hazard column '" + id + "' listed twice");
        }
    }
}

std::vector<std::string> FactorSpec::indicators() const {
    std::vector<std::string> out;
    for (const auto &block : factors) {
        out.insert(out.end(), block.indicators.begin(), block.indicators.end());
    }
    return out;
}

std::vector<std::string> FactorSpec::factor_names() const {
    std::vector<std::string> out;
    out.reserve(factors.size());
    for (const auto &block : factors) {
        out.push_back(block.name);
    }
    return out;
}

SingleFactorFit fit_single_factor_correlation(const Matrix &correlation, Eigen::Index n,
                                              const FitOptions &options) {
    const auto p = correlation.rows();
    if (p < 2 || correlation.cols() != p) {
        throw Error(ErrorCode::DegenerateBlock, "a factor block needs at least two indicators");
    }
    if (!correlation.allFinite()) {
        throw Error(ErrorCode::DegenerateBlock, "correlation matrix has non-finite entries");
    }

    SingleFactorFit fit;
    if (p == 2) {
        // Exactly identified under equal loadings: lambda_1 = lambda_2 = sqrt(r).
        const double r = correlation(0, 1);
        const double l = std::sqrt(std::abs(r));
        fit.loadings = Vector(2);
        fit.loadings << l, std::copysign(l, r);
        fit.method = options.method;
        fit.converged = true;
    } else if (options.method == FitMethod::maximum_likelihood) {
        fit = fit_maximum_likelihood(correlation, options);
        if (!fit.converged) {
            if (!options.principal_axis_fallback) {
                throw Error(ErrorCode::NonConvergence,
                            "ML fit did not converge in " + std::to_string(fit.iterations) +
                                " iterations");
            }
            fit = fit_principal_axis(correlation, options);
            if (!fit.converged) {
                throw Error(ErrorCode::NonConvergence,
                            "neither ML nor principal-axis fit converged");
            }
        }
    } else {
        fit = fit_principal_axis(correlation, options);
        if (!fit.converged) {
            throw Error(ErrorCode::NonConvergence, "principal-axis fit did not converge");
        }
    }
    finish(fit, correlation, n, options);
    return fit;
}

SingleFactorFit fit_single_factor(const Matrix &block, const FitOptions &options) {
    if (block.cols() < 2) {
        throw Error(ErrorCode::DegenerateBlock, "a factor block needs at least two indicators");
    }
    if (block.rows() < 3) {
        throw Error(ErrorCode::InsufficientRows, "a factor block needs at least three rows");
    }
    Matrix r;
    try {
        r = stats::correlation(block);
    } catch (const Error &e) {
        throw Error(ErrorCode::DegenerateBlock, e.what());
    }
    return fit_single_factor_correlation(r, block.rows(), options);
}

IndicatorWeights indicator_weights(const Vector &loadings, const Vector &explained_variances) {
    if (loadings.size() != explained_variances.size() || loadings.size() == 0) {
        throw Error(ErrorCode::ColumnMismatch, "loadings and explained variances differ in length");
    }
    if (!loadings.allFinite() || !explained_variances.allFinite()) {
        throw Error(ErrorCode::ZeroLoadings, "non-finite loadings");
    }
    const double lambda_sum = loadings.sum();
    const double variance_sum = explained_variances.sum();
    if (!(lambda_sum > 0.0) || !(variance_sum > 0.0)) {
        throw Error(ErrorCode::ZeroLoadings, "loadings carry no common variance");
    }
    IndicatorWeights out;
    out.raw = (loadings / lambda_sum).cwiseProduct(explained_variances / variance_sum);
    const double raw_sum = out.raw.sum();
    if (!(std::abs(raw_sum) > 0.0)) {
        throw Error(ErrorCode::ZeroLoadings, "indicator weights sum to zero");
    }
    out.weights = out.raw / raw_sum;
    return out;
}

const FactorFit &FactorModel::factor(std::string_view name) const {
    for (const auto &f : factors) {
        if (f.name == name) {
            return f;
        }
    }
    throw Error(ErrorCode::ColumnMismatch, "no fitted factor '" + std::string(name) + "'");
}

FactorModel fit_factor_model(const NormalizedTable &normalized, const FactorSpec &spec,
                             const FitOptions &options, Warnings *warnings) {
    auto warn = [&](const std::string &kind, const std::string &message) {
        if (warnings != nullptr) {
            warnings->push_back({"cfa", kind, message});
        }
    };

    FactorModel model;
    for (const auto &block : spec.factors) {
        const Matrix data = normalized.table.matrix(block.indicators);
        FactorFit fitted{block.name, block.indicators, fit_single_factor(data, options), {}};
        const auto &fit = fitted.fit;
        if (fit.degenerate) {
            warn("DegenerateBlock", "factor '" + block.name + "' has no common variance");
        }
        if (fit.heywood) {
            warn("HeywoodCase", "factor '" + block.name + "' has a communality clamped to 1 - " +
                                    std::to_string(options.heywood_tolerance));
        }
        if (fit.method != options.method) {
            warn("NonConvergence", "factor '" + block.name +
                                       "' refitted with principal axis after ML did not converge");
        }
        fitted.weights = indicator_weights(fit.loadings, fit.communalities);
        if ((fitted.weights.weights.array() < 0.0).any()) {
            warn("NegativeWeight", "factor '" + block.name + "' has a negative indicator weight");
        }
        model.factors.push_back(std::move(fitted));
    }
    return model;
}

FactorScores factor_scores(const NormalizedTable &normalized, const FactorSpec &spec,
                           const FactorModel &model) {
    FactorScores out;
    out.factor_names = spec.factor_names();
    out.scores = Matrix::Zero(static_cast<Eigen::Index>(normalized.table.rows()),
                              static_cast<Eigen::Index>(spec.factors.size()));
    for (std::size_t k = 0; k < spec.factors.size(); ++k) {
        const auto &block = spec.factors[k];
        const auto &fitted = model.factor(block.name);
        if (fitted.indicators != block.indicators ||
            fitted.weights.weights.size() != static_cast<Eigen::Index>(block.indicators.size())) {
            throw Error(ErrorCode::ColumnMismatch,
                        "model for '" + block.name + "' was fitted on different columns");
        }
        const Matrix z = normalized.table.matrix(block.indicators);
        out.scores.col(static_cast<Eigen::Index>(k)) = z * fitted.weights.weights;
    }
    return out;
}

} // namespace riskdex
