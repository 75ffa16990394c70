#pragma once

#include "riskdex/canonical.hpp"
#include "riskdex/composite.hpp"
#include "riskdex/factor_model.hpp"
#include "riskdex/ingest.hpp"
#include "riskdex/preprocess.hpp"
#include "riskdex/regression.hpp"
#include "riskdex/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace riskdex {

enum class AdequacyScope { joint, per_factor };

struct PipelineConfig {
    std::filesystem::path indicators;
    std::filesystem::path regions; // optional
    std::filesystem::path gates;   // optional; requires regions and tourist_column
    std::filesystem::path output_dir = "out";
    FactorSpec spec;
    MissingPolicy missing_policy = MissingPolicy::reject;
    bool strict_adequacy = false;
    int bins = kDefaultBins;
    bool normalize_regression = true;
    AdequacyScope adequacy_scope = AdequacyScope::joint;
    std::string tourist_column;
    FitOptions fit;
};

/// Parses the YAML config grammar documented in README.md. Relative paths are
/// resolved against `base_dir`.
PipelineConfig parse_config(std::string_view yaml_text, const std::filesystem::path &base_dir = {});
PipelineConfig load_config(const std::filesystem::path &path);

/// Stable text form of every analysis-relevant config field (output_dir is
/// excluded); feeds the config hash.
std::string canonical_config(const PipelineConfig &config);

/// SHA-256 over canonical_config() and the bytes of every input file.
std::string config_hash(const PipelineConfig &config);

enum class Stage { normalize, adequacy, cfa, cca, index, regress, all };

std::optional<Stage> parse_stage(std::string_view name);
std::string_view to_string(Stage stage) noexcept;

/// Everything the pipeline computes, filled up to the requested stage.
struct PipelineResult {
    IndicatorTable table;
    std::vector<Region> regions;
    std::vector<std::optional<std::string>> group_tags; // parallel to table rows
    NormalizedTable normalized;
    std::vector<AdequacyReport> adequacy;
    FactorModel model;
    FactorScores factor_scores;
    CanonicalSolution canonical;
    Vector factor_weights;
    Vector hazard_weights;
    RiskScores scores;
    std::vector<NamedCorrelation> correlations;
    MvRegressionFit regression;
    std::vector<ManovaRow> manova;
    std::vector<CoefficientTest> coefficient_tests;
    Warnings warnings;
};

/// Loads inputs and checks that every referenced column exists. Throws
/// MissingColumn / InvalidConfig before any numerical work.
PipelineResult load_inputs(const PipelineConfig &config);

/// Runs every stage up to and including `last`.
PipelineResult compute(const PipelineConfig &config, Stage last = Stage::all);

AnalysisReport make_report(const PipelineConfig &config, const PipelineResult &result);

/// Writes the artifacts of `stage` (or of every stage for Stage::all) into
/// config.output_dir and returns their paths.
std::vector<std::filesystem::path> write_stage_artifacts(const PipelineConfig &config,
                                                         const PipelineResult &result, Stage stage);

/// normalized.csv content: region_id plus every indicator and hazard column.
std::string normalized_csv(const PipelineConfig &config, const NormalizedTable &normalized);

/// compute() followed by write_stage_artifacts().
std::vector<std::filesystem::path> run_pipeline(const PipelineConfig &config, Stage stage = Stage::all);

} // namespace riskdex
