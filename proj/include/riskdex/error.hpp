#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riskdex {

/// Every failure the library can raise. Grouped by the stage that owns it;
/// the group decides the CLI exit code (see exit_code()).
enum class ErrorCode {
    // configuration / usage
    InvalidConfig,
    MissingColumn,
    // data_ingest
    MissingCell,
    DuplicateRegionId,
    NonNumericCell,
    EmptyTable,
    MalformedGeoJson,
    MissingRegionIdProperty,
    InvalidGeometry,
    EmptyRegionList,
    InvalidGate,
    // preprocess
    DegenerateColumn,
    SingularCorrelation,
    InsufficientRows,
    AdequacyFailed,
    // factor_model
    NonConvergence,
    DegenerateBlock,
    ZeroLoadings,
    ColumnMismatch,
    // canonical
    SingularBlock,
    DegenerateWeights,
    // composite
    WeightMismatch,
    TooFewDistinctValues,
    DegenerateVariance,
    EmptySubset,
    // regression
    RankDeficientDesign,
    SingularResidualCrossProduct,
    // report_export
    IoFailure,
    RegionWithoutGeometry,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit status for a given error (documented in `riskdex --help`).
int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_{code} {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

/// Non-fatal diagnostics (Heywood cases, negative weights, failed adequacy
/// gate, ...) accumulated by the pipeline and copied into the report.
struct Warning {
    std::string stage;
    std::string kind;
    std::string message;
};

using Warnings = std::vector<Warning>;

} // namespace riskdex
