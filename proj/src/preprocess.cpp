#include "riskdex/preprocess.hpp"

#include "riskdex/error.hpp"

#include <algorithm>
#include <cmath>

namespace riskdex {
namespace {

constexpr double kSingularEigenvalue = 1e-12;

Matrix checked_correlation(const Matrix &columns) {
    const auto n = columns.rows();
    const auto p = columns.cols();
    if (p < 2) {
        throw Error(ErrorCode::InsufficientRows, "need at least two columns, got " + std::to_string(p));
    }
    if (n <= p) {
        throw Error(ErrorCode::InsufficientRows, "need more rows (" + std::to_string(n) +
                                                     ") than columns (" + std::to_string(p) + ")");
    }
    return stats::correlation(columns);
}

} // namespace

const ColumnRange &NormalizedTable::range(std::string_view id) const {
    const auto &cols = table.columns();
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].id == id) {
            return ranges[j];
        }
    }
    throw Error(ErrorCode::MissingColumn, "no column '" + std::string(id) + "'");
}

std::vector<double> normalize_column(std::span<const double> values, ColumnRange *range) {
    if (values.empty()) {
        throw Error(ErrorCode::DegenerateColumn, "empty column");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double max = *hi;
    if (!(max > min)) {
        throw Error(ErrorCode::DegenerateColumn, "all values equal " + std::to_string(min));
    }
    const double width = max - min;
    std::vector<double> out;
    out.reserve(values.size());
    for (const double x : values) {
        out.push_back((x - min) / width);
    }
    if (range != nullptr) {
        *range = {min, max};
    }
    return out;
}

NormalizedTable normalize(const IndicatorTable &table) {
    NormalizedTable result{IndicatorTable(table.regions()), {}};
    for (const auto &column : table.columns()) {
        ColumnRange range;
        std::vector<double> z;
        try {
            z = normalize_column(column.values, &range);
        } catch (const Error &) {
            throw Error(ErrorCode::DegenerateColumn, "column '" + column.id + "': all values equal");
        }
        result.table.set_column({column.id, column.unit, column.provenance, std::move(z)});
        result.ranges.push_back(range);
    }
    return result;
}

BartlettResult bartlett_sphericity(const Matrix &columns) {
    const Matrix r = checked_correlation(columns);
    const auto n = static_cast<double>(columns.rows());
    const auto p = columns.cols();

    const Eigen::SelfAdjointEigenSolver<Matrix> eig(r, Eigen::EigenvaluesOnly);
    const Vector values = eig.eigenvalues();
    if (values.minCoeff() <= kSingularEigenvalue) {
        throw Error(ErrorCode::SingularCorrelation, "correlation matrix is singular");
    }
    const double log_det = values.array().log().sum();
    const double multiplier = n - 1.0 - (2.0 * static_cast<double>(p) + 5.0) / 6.0;

    BartlettResult result;
    result.df = static_cast<int>(p * (p - 1) / 2);
    result.chi2 = std::max(0.0, -multiplier * log_det);
    result.p_value = stats::chi_square_upper_tail(result.chi2, result.df);
    return result;
}

double kmo(const Matrix &columns) {
    const Matrix r = checked_correlation(columns);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
    if (eig.eigenvalues().minCoeff() <= kSingularEigenvalue) {
        throw Error(ErrorCode::SingularCorrelation, "correlation matrix is not invertible");
    }
    const Vector inv_values = eig.eigenvalues().cwiseInverse();
    const Matrix s = eig.eigenvectors() * inv_values.asDiagonal() * eig.eigenvectors().transpose();

    double r2 = 0.0;
    double q2 = 0.0;
    for (Eigen::Index j = 0; j < r.rows(); ++j) {
        for (Eigen::Index k = 0; k < r.cols(); ++k) {
            if (j == k) {
                continue;
            }
            const double q = -s(j, k) / std::sqrt(s(j, j) * s(k, k));
            r2 += r(j, k) * r(j, k);
            q2 += q * q;
        }
    }
    // R = I: no shared variance at all, report the floor.
    if (r2 + q2 == 0.0) {
        return 0.0;
    }
    return r2 / (r2 + q2);
}

AdequacyReport adequacy(const Matrix &columns, std::string scope) {
    const auto bartlett = bartlett_sphericity(columns);
    AdequacyReport report;
    report.scope = std::move(scope);
    report.bartlett_chi2 = bartlett.chi2;
    report.bartlett_df = bartlett.df;
    report.bartlett_p = bartlett.p_value;
    report.kmo = kmo(columns);
    report.passed = report.bartlett_p < kBartlettAlpha && report.kmo >= kMinimumKmo;
    return report;
}

} // namespace riskdex
