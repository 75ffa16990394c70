#pragma once

#include "riskdex/factor_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace riskdex::synthetic {

struct PlantedBlock {
    std::string name;
    std::vector<std::string> indicators;
    std::vector<double> loadings;
};

/// Layout mirroring the three-factor, fifteen-indicator, three-hazard design.
std::vector<PlantedBlock> default_blocks();

struct Options {
    int regions = 20;
    std::uint64_t seed = 20200524;
    std::vector<PlantedBlock> blocks = default_blocks();
    std::vector<std::string> hazards{"confirmed", "pdp", "odp"};
    /// Weights of the factor scores in the hazard-generating signal.
    std::vector<double> factor_weights{0.40, 0.45, 0.15};
    /// Noise standard deviation relative to the signal's standard deviation.
    double hazard_noise = 0.02;
    /// Derive the first block's last indicator from gate arrivals buffered
    /// onto the regions (one gate at each region centre).
    bool tourists_from_gates = true;
};

struct Fixture {
    std::filesystem::path dir;
    std::filesystem::path config;
    FactorSpec spec;
    std::vector<double> planted_factor_weights;
};

/// Writes indicators.csv, regions.geojson, gates.csv and config.yaml into
/// `dir`. Hazard counts are generated from factor scores computed on the
/// generated indicators, so the planted factor weights live on the same scale
/// the pipeline weights.
Fixture write_fixture(const std::filesystem::path &dir, const Options &options = {});

} // namespace riskdex::synthetic
