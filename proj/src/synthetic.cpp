#include "riskdex/synthetic.hpp"

#include "riskdex/ingest.hpp"
#include "riskdex/preprocess.hpp"
#include "riskdex/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace riskdex::synthetic {
namespace {

double rounded10(double value) { return std::strtod(fmt::format("{:.10g}", value).c_str(), nullptr); }

struct Scale {
    double base;
    double spread;
};

Scale indicator_scale(std::size_t index) {
    // Distinct units per column so normalisation has work to do.
    static constexpr Scale scales[] = {{1200.0, 400.0}, {0.3, 0.08},  {2000.0, 600.0}, {150.0, 40.0},
                                       {60.0, 18.0},    {25.0, 7.0},   {12.0, 3.5},     {80.0, 22.0},
                                       {9.0, 2.5},      {200.0, 55.0}, {0.18, 0.04},    {0.12, 0.03},
                                       {0.3, 0.07},     {101.0, 3.0},  {0.06, 0.015}};
    return scales[index % std::size(scales)];
}

} // namespace

std::vector<PlantedBlock> default_blocks() {
    return {
        {"exposure", {"pop_density", "commuters", "foreign_tourists"}, {0.85, 0.80, 0.75}},
        {"transmission",
         {"religious_places", "minimarkets", "traditional_markets", "malls", "banks", "hotels",
          "restaurants"},
         {0.80, 0.78, 0.76, 0.74, 0.72, 0.71, 0.70}},
        {"vulnerability",
         {"age_50_plus", "comorbidity", "handwashing", "sex_ratio", "small_houses"},
         {0.75, 0.70, 0.68, 0.65, 0.62}},
    };
}

Fixture write_fixture(const std::filesystem::path &dir, const Options &options) {
    namespace fs = std::filesystem;
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = options.regions;
    const auto rows = static_cast<std::size_t>(n);

    // Regions: 1-degree cells on a grid, tagged west/east by grid column.
    const int columns = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    nlohmann::json features = nlohmann::json::array();
    std::vector<std::string> ids;
    std::vector<geo::LonLat> centres;
    for (int i = 0; i < n; ++i) {
        const int col = i % columns;
        const int row = i / columns;
        const double lon = 100.0 + col;
        const double lat = -5.0 + row;
        const std::string id = fmt::format("R{:03d}", i + 1);
        ids.push_back(id);
        centres.push_back({lon + 0.5, lat + 0.5});
        nlohmann::json ring = nlohmann::json::array(
            {{lon, lat}, {lon + 1.0, lat}, {lon + 1.0, lat + 1.0}, {lon, lat + 1.0}, {lon, lat}});
        features.push_back({{"type", "Feature"},
                            {"properties",
                             {{"region_id", id},
                              {"name", fmt::format("Region {}", i + 1)},
                              {"group_tag", col < (columns + 1) / 2 ? "west" : "east"}}},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
    const nlohmann::json collection = {{"type", "FeatureCollection"}, {"features", features}};
    const auto regions = parse_regions(collection);

    // Indicators from the planted one-factor blocks.
    IndicatorTable table(ids);
    std::vector<Gate> gates;
    std::string tourist_column;
    FactorSpec spec;
    std::size_t column_index = 0;
    for (std::size_t b = 0; b < options.blocks.size(); ++b) {
        const auto &block = options.blocks[b];
        spec.factors.push_back({block.name, block.indicators});
        std::vector<double> latent(rows);
        for (auto &v : latent) {
            v = normal(rng);
        }
        for (std::size_t j = 0; j < block.indicators.size(); ++j, ++column_index) {
            const double lambda = block.loadings[j];
            const double unique = std::sqrt(1.0 - lambda * lambda);
            std::vector<double> x(rows);
            for (std::size_t i = 0; i < rows; ++i) {
                x[i] = lambda * latent[i] + unique * normal(rng);
            }
            const bool gate_column = options.tourists_from_gates && b == 0 && j + 1 == block.indicators.size();
            if (gate_column) {
                tourist_column = block.indicators[j];
                for (std::size_t i = 0; i < rows; ++i) {
                    const double arrivals = std::max(0.0, std::round(2000.0 + 600.0 * x[i]));
                    gates.push_back({fmt::format("G{:03d}", i + 1), centres[i], arrivals, i == 0 ? 50.0 : 25.0});
                }
                table.set_column({block.indicators[j], "arrivals", "gates", assign_gate_arrivals(regions, gates)});
                continue;
            }
            const auto scale = indicator_scale(column_index);
            std::vector<double> values(rows);
            for (std::size_t i = 0; i < rows; ++i) {
                values[i] = rounded10(scale.base + scale.spread * x[i]);
            }
            table.set_column({block.indicators[j], "", "synthetic", std::move(values)});
        }
    }
    spec.hazard_columns = options.hazards;

    // Hazards from factor scores on the same normalised indicators the
    // pipeline will see.
    const auto normalized = normalize(table);
    const auto model = fit_factor_model(normalized, spec);
    const auto scores = factor_scores(normalized, spec, model);
    Vector weights(static_cast<Eigen::Index>(options.factor_weights.size()));
    for (std::size_t k = 0; k < options.factor_weights.size(); ++k) {
        weights(static_cast<Eigen::Index>(k)) = options.factor_weights[k];
    }
    const Vector signal = scores.scores * weights;
    const double mean = signal.mean();
    const double sd = std::sqrt((signal.array() - mean).square().sum() / static_cast<double>(n - 1));
    static constexpr Scale hazard_scales[] = {{140.0, 40.0}, {55.0, 15.0}, {420.0, 120.0}};
    std::vector<std::vector<double>> hazards;
    for (std::size_t h = 0; h < options.hazards.size(); ++h) {
        const auto scale = hazard_scales[h % std::size(hazard_scales)];
        std::vector<double> counts(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            const double standardized = (signal(static_cast<Eigen::Index>(i)) - mean) / sd;
            counts[i] = std::max(0.0, std::round(scale.base + scale.spread *
                                                                  (standardized + options.hazard_noise * normal(rng))));
        }
        hazards.push_back(std::move(counts));
    }

    fs::create_directories(dir);
    std::string csv_text = "region_id";
    for (const auto &column : table.columns()) {
        if (column.id != tourist_column) {
            csv_text += "," + column.id;
        }
    }
    for (const auto &h : options.hazards) {
        csv_text += "," + h;
    }
    csv_text += "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        csv_text += ids[i];
        for (const auto &column : table.columns()) {
            if (column.id != tourist_column) {
                csv_text += "," + fmt::format("{:.10g}", column.values[i]);
            }
        }
        for (const auto &h : hazards) {
            csv_text += "," + fmt::format("{:.10g}", h[i]);
        }
        csv_text += "\n";
    }
    write_text_file(dir / "indicators.csv", csv_text);
    write_text_file(dir / "regions.geojson", collection.dump(1) + "\n");

    std::string config = "# Synthetic fixture generated by riskdex-synth\n";
    config += "indicators: indicators.csv\nregions: regions.geojson\n";
    if (!tourist_column.empty()) {
        std::string gates_csv = "gate_id,lat,lon,arrivals,buffer_km\n";
        for (const auto &g : gates) {
            gates_csv += fmt::format("{},{},{},{},{}\n", g.gate_id, g.location.lat, g.location.lon,
                                     g.arrivals, g.buffer_km);
        }
        write_text_file(dir / "gates.csv", gates_csv);
        config += "gates: gates.csv\ntourist_column: " + tourist_column + "\n";
    }
    config += "output: out\nmissing_policy: reject\nbins: 5\nfactors:\n";
    for (const auto &block : spec.factors) {
        config += "  - name: " + block.name + "\n    indicators: [";
        for (std::size_t j = 0; j < block.indicators.size(); ++j) {
            config += (j ? ", " : "") + block.indicators[j];
        }
        config += "]\n";
    }
    config += "hazards: [";
    for (std::size_t h = 0; h < options.hazards.size(); ++h) {
        config += (h ? ", " : "") + options.hazards[h];
    }
    config += "]\n";
    write_text_file(dir / "config.yaml", config);

    return {dir, dir / "config.yaml", spec, options.factor_weights};
}

} // namespace riskdex::synthetic
