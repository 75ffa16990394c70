#pragma once

#include <Eigen/Dense>

#include <span>

namespace riskdex {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace stats {

/// Column means of an n x p matrix.
Vector column_means(const Matrix &data);

/// Unbiased (n - 1) sample covariance of the columns.
Matrix covariance(const Matrix &data);

/// Pearson correlation matrix of the columns. Throws DegenerateColumn when a
/// column has zero variance.
Matrix correlation(const Matrix &data);

/// Pearson correlation of two equally sized samples. Returns NaN when either
/// side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Upper tail P(X > x) for X ~ chi-square(df).
double chi_square_upper_tail(double x, double df);

/// Upper tail P(X > f) for X ~ F(df1, df2).
double f_upper_tail(double f, double df1, double df2);

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
double t_two_sided(double t, double df);

/// S^{-1/2} of a symmetric positive semidefinite matrix through its
/// eigendecomposition; eigenvalues below `floor` are raised to `floor`.
Matrix inverse_sqrt_symmetric(const Matrix &s, double floor = 1e-12);

} // namespace stats
} // namespace riskdex
