#include "riskdex/canonical.hpp"

#include <algorithm>
#include <cmath>

namespace riskdex {
namespace {

Matrix conditioned(const Matrix &s, bool &ridged) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    const double largest = eig.eigenvalues().maxCoeff();
    const double smallest = eig.eigenvalues().minCoeff();
    if (!(largest > 0.0)) {
        throw Error(ErrorCode::SingularBlock, "covariance block is zero");
    }
    if (smallest <= 0.0 || largest / smallest > kRidgeCondition) {
        ridged = true;
        Matrix out = s;
        out.diagonal().array() += 1e-10 * s.trace();
        return out;
    }
    return s;
}

double sample_sd(const Vector &v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

} // namespace

CanonicalSolution cca(const Matrix &x, const Matrix &y) {
    const auto n = x.rows();
    const auto k = x.cols();
    const auto m = y.cols();
    if (y.rows() != n) {
        throw Error(ErrorCode::InsufficientRows, "X and Y have different row counts");
    }
    if (k == 0 || m == 0 || n <= k + m) {
        throw Error(ErrorCode::InsufficientRows,
                    "need n > K + M (n=" + std::to_string(n) + ", K=" + std::to_string(k) +
                        ", M=" + std::to_string(m) + ")");
    }

    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const double denom = static_cast<double>(n - 1);
    const Matrix sxy = xc.transpose() * yc / denom;

    const Matrix raw_sxx = xc.transpose() * xc / denom;
    const Matrix raw_syy = yc.transpose() * yc / denom;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(raw_sxx(j, j) > 0.0)) {
            throw Error(ErrorCode::SingularBlock, "X column " + std::to_string(j) + " is constant");
        }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        if (!(raw_syy(j, j) > 0.0)) {
            throw Error(ErrorCode::SingularBlock, "Y column " + std::to_string(j) + " is constant");
        }
    }
    CanonicalSolution solution;
    const Matrix sxx = conditioned(raw_sxx, solution.ridge_applied);
    const Matrix syy = conditioned(raw_syy, solution.ridge_applied);

    const Matrix sxx_inv_root = stats::inverse_sqrt_symmetric(sxx);
    const Matrix syy_inv_root = stats::inverse_sqrt_symmetric(syy);
    const Matrix whitened = sxx_inv_root * sxy * syy_inv_root;
    const Eigen::JacobiSVD<Matrix> svd(whitened, Eigen::ComputeFullU | Eigen::ComputeFullV);

    const auto pairs = std::min(k, m);
    for (Eigen::Index i = 0; i < pairs; ++i) {
        CanonicalPair pair;
        pair.a = sxx_inv_root * svd.matrixU().col(i);
        pair.b = syy_inv_root * svd.matrixV().col(i);
        const double sd_u = sample_sd(x * pair.a);
        const double sd_v = sample_sd(y * pair.b);
        if (!(sd_u > 0.0) || !(sd_v > 0.0)) {
            throw Error(ErrorCode::SingularBlock, "canonical variate has zero variance");
        }
        pair.a /= sd_u;
        pair.b /= sd_v;
        if (pair.a.sum() < 0.0) {
            pair.a = -pair.a;
            pair.b = -pair.b;
        }
        pair.rho = std::clamp(svd.singularValues()(i), 0.0, 1.0);
        solution.pairs.push_back(std::move(pair));
    }
    return solution;
}

Vector normalized_weights(const Vector &coefficients, Warnings *warnings, std::string_view label) {
    const double total = coefficients.sum();
    if (coefficients.size() == 0 || !std::isfinite(total) || std::abs(total) <= 1e-12) {
        throw Error(ErrorCode::DegenerateWeights,
                    std::string(label) + ": canonical coefficients sum to zero");
    }
    Vector w = coefficients / total;
    if (warnings != nullptr && (w.array() < 0.0).any()) {
        warnings->push_back({"cca", "NegativeWeight", std::string(label) + " contain a negative entry"});
    }
    return w;
}

} // namespace riskdex
