#pragma once

#include "riskdex/ingest.hpp"
#include "riskdex/stats.hpp"

#include <span>
#include <string>
#include <vector>

namespace riskdex {

struct ColumnRange {
    double min = 0.0;
    double max = 0.0;
};

/// Min-max scaled copy of an IndicatorTable. Each column keeps the range it
/// was scaled with.
struct NormalizedTable {
    IndicatorTable table;
    std::vector<ColumnRange> ranges; // parallel to table.columns()

    [[nodiscard]] const ColumnRange &range(std::string_view id) const;
};

/// z = (x - min) / (max - min) for one column. Throws DegenerateColumn if the
/// column is constant.
std::vector<double> normalize_column(std::span<const double> values, ColumnRange *range = nullptr);

NormalizedTable normalize(const IndicatorTable &table);

struct BartlettResult {
    double chi2 = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Bartlett's sphericity test on the Pearson correlation of `columns`.
BartlettResult bartlett_sphericity(const Matrix &columns);

/// Kaiser-Meyer-Olkin sampling adequacy from the anti-image correlations.
double kmo(const Matrix &columns);

struct AdequacyReport {
    std::string scope; // "joint" or a factor name
    double bartlett_chi2 = 0.0;
    int bartlett_df = 0;
    double bartlett_p = 1.0;
    double kmo = 0.0;
    bool passed = false;
};

inline constexpr double kBartlettAlpha = 0.05;
inline constexpr double kMinimumKmo = 0.50;

AdequacyReport adequacy(const Matrix &columns, std::string scope = "joint");

} // namespace riskdex
