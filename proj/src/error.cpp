#include "riskdex/error.hpp"

namespace riskdex {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::DuplicateRegionId: return "DuplicateRegionId";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::MalformedGeoJson: return "MalformedGeoJson";
    case ErrorCode::MissingRegionIdProperty: return "MissingRegionIdProperty";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::EmptyRegionList: return "EmptyRegionList";
    case ErrorCode::InvalidGate: return "InvalidGate";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::SingularCorrelation: return "SingularCorrelation";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::AdequacyFailed: return "AdequacyFailed";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateBlock: return "DegenerateBlock";
    case ErrorCode::ZeroLoadings: return "ZeroLoadings";
    case ErrorCode::ColumnMismatch: return "ColumnMismatch";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::WeightMismatch: return "WeightMismatch";
    case ErrorCode::TooFewDistinctValues: return "TooFewDistinctValues";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::SingularResidualCrossProduct: return "SingularResidualCrossProduct";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::RegionWithoutGeometry: return "RegionWithoutGeometry";
    }
    return "Unknown";
}

int exit_code(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::MissingColumn:
        return 2;
    case ErrorCode::MissingCell:
    case ErrorCode::DuplicateRegionId:
    case ErrorCode::NonNumericCell:
    case ErrorCode::EmptyTable:
    case ErrorCode::MalformedGeoJson:
    case ErrorCode::MissingRegionIdProperty:
    case ErrorCode::InvalidGeometry:
    case ErrorCode::EmptyRegionList:
    case ErrorCode::InvalidGate:
        return 3;
    case ErrorCode::AdequacyFailed:
        return 4;
    case ErrorCode::DegenerateColumn:
    case ErrorCode::SingularCorrelation:
    case ErrorCode::InsufficientRows:
        return 5;
    case ErrorCode::NonConvergence:
    case ErrorCode::DegenerateBlock:
    case ErrorCode::ZeroLoadings:
    case ErrorCode::ColumnMismatch:
        return 6;
    case ErrorCode::SingularBlock:
    case ErrorCode::DegenerateWeights:
        return 7;
    case ErrorCode::WeightMismatch:
    case ErrorCode::TooFewDistinctValues:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::EmptySubset:
        return 8;
    case ErrorCode::RankDeficientDesign:
    case ErrorCode::SingularResidualCrossProduct:
        return 9;
    case ErrorCode::IoFailure:
    case ErrorCode::RegionWithoutGeometry:
        return 10;
    }
    return 1;
}

} // namespace riskdex
