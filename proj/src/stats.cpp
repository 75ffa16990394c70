#include "riskdex/stats.hpp"

#include "riskdex/error.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

namespace riskdex::stats {

Vector column_means(const Matrix &data) { return data.colwise().mean().transpose(); }

Matrix covariance(const Matrix &data) {
    const auto n = data.rows();
    if (n < 2) {
        throw Error(ErrorCode::InsufficientRows, "covariance needs at least two rows");
    }
    const Matrix centered = data.rowwise() - data.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

Matrix correlation(const Matrix &data) {
    const Matrix cov = covariance(data);
    const Vector sd = cov.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
        if (!(sd(j) > 0.0)) {
            throw Error(ErrorCode::DegenerateColumn,
                        "column " + std::to_string(j) + " has zero variance");
        }
    }
    const Vector inv = sd.cwiseInverse();
    Matrix r = inv.asDiagonal() * cov * inv.asDiagonal();
    for (Eigen::Index j = 0; j < r.rows(); ++j) {
        r(j, j) = 1.0;
    }
    return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const auto n = x.size();
    if (n != y.size() || n < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sxy / std::sqrt(sxx * syy);
}

double chi_square_upper_tail(double x, double df) {
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double f_upper_tail(double f, double df1, double df2) {
    if (f <= 0.0) {
        return 1.0;
    }
    const boost::math::fisher_f dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

double t_two_sided(double t, double df) {
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Matrix inverse_sqrt_symmetric(const Matrix &s, double floor) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    const Vector values = eig.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
    return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace riskdex::stats
