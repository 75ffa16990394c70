#pragma once

#include "riskdex/canonical.hpp"
#include "riskdex/composite.hpp"
#include "riskdex/factor_model.hpp"
#include "riskdex/ingest.hpp"
#include "riskdex/preprocess.hpp"
#include "riskdex/regression.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace riskdex {

/// Sequential light-to-dark red palette used for rank_color (ColorBrewer
/// "Reds", 5 classes). Rank 1 maps to the first entry, the top rank to the last.
inline constexpr std::array<std::string_view, 5> kRankPalette{"#fee5d9", "#fcae91", "#fb6a4a",
                                                              "#de2d26", "#a50f15"};

/// Palette entry for `rank` in 1..bins; ranks are spread evenly over the
/// palette when bins != 5.
std::string_view rank_color(int rank, int bins);

struct RunMetadata {
    std::string config_hash;
    std::optional<std::string> timestamp;
    std::string version;
};

struct NamedCorrelation {
    std::string key; // "overall" or a group_tag
    double r = 0.0;
    std::size_t regions = 0;
};

struct AnalysisReport {
    std::vector<AdequacyReport> adequacy;
    FactorSpec spec;
    FactorModel factor_models;
    CanonicalSolution canonical;
    Vector factor_weights;
    Vector hazard_weights;
    std::vector<NamedCorrelation> correlations;
    std::vector<std::string> regions;
    std::vector<std::optional<std::string>> group_tags; // parallel to regions; may be empty
    RiskScores scores;
    std::vector<ManovaRow> manova;
    std::vector<CoefficientTest> coefficient_tests;
    Vector r_squared;
    Warnings warnings;
    RunMetadata run;
};

/// Rounds to 10 significant digits and wraps as a JSON number (null if not finite).
nlohmann::json json_number(double value);

// Section builders; the full report is the union of these under fixed keys.
nlohmann::json adequacy_json(const std::vector<AdequacyReport> &reports);
nlohmann::json factor_models_json(const FactorSpec &spec, const FactorModel &model);
nlohmann::json canonical_json(const FactorSpec &spec, const CanonicalSolution &solution,
                              const Vector &factor_weights, const Vector &hazard_weights);
nlohmann::json correlations_json(const std::vector<NamedCorrelation> &correlations);
nlohmann::json manova_json(const FactorSpec &spec, const std::vector<ManovaRow> &rows);
nlohmann::json coefficient_tests_json(const std::vector<CoefficientTest> &tests);
nlohmann::json warnings_json(const Warnings &warnings);

nlohmann::json to_json(const AnalysisReport &report);

/// Serialises with sorted keys and a trailing newline. Floats print in their
/// shortest round-trip form; indent < 0 gives the compact form.
std::string dump_json(const nlohmann::json &doc, int indent = 2);

std::string scores_csv(const RiskScores &scores);
void write_scores_csv(const RiskScores &scores, const std::filesystem::path &path);

nlohmann::json choropleth_geojson(const std::vector<Region> &regions, const RiskScores &scores);
void write_choropleth_geojson(const std::vector<Region> &regions, const RiskScores &scores,
                              const std::filesystem::path &path);

void write_report_json(const AnalysisReport &report, const std::filesystem::path &path);

/// Writes `content` to `path`; throws IoFailure.
void write_text_file(const std::filesystem::path &path, std::string_view content);

/// Six-significant-digit rendering used for every number in CSV outputs.
std::string format_g6(double value);

} // namespace riskdex
