#pragma once

#include "riskdex/geo.hpp"
#include "riskdex/stats.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskdex {

struct Region {
    std::string region_id;
    std::string name;
    std::vector<geo::Polygon> polygons;
    std::optional<std::string> group_tag;
    /// The feature as read, geometry and properties untouched; exporters add
    /// properties to a copy of it.
    nlohmann::json feature;
};

struct Gate {
    std::string gate_id;
    geo::LonLat location;
    double arrivals = 0.0;
    double buffer_km = 25.0;
};

struct IndicatorColumn {
    std::string id;
    std::string unit;
    std::string provenance;
    std::vector<double> values;
};

/// Region x indicator table. Column values are stored in region order.
class IndicatorTable {
  public:
    IndicatorTable() = default;
    explicit IndicatorTable(std::vector<std::string> regions) : regions_{std::move(regions)} {}

    [[nodiscard]] const std::vector<std::string> &regions() const noexcept { return regions_; }
    [[nodiscard]] const std::vector<IndicatorColumn> &columns() const noexcept { return columns_; }
    [[nodiscard]] std::size_t rows() const noexcept { return regions_.size(); }

    /// Appends a column, or replaces the values of an existing one with the
    /// same id. Throws ColumnMismatch if the length differs from rows().
    void set_column(IndicatorColumn column);

    [[nodiscard]] bool has_column(std::string_view id) const noexcept;
    /// Throws MissingColumn.
    [[nodiscard]] const IndicatorColumn &column(std::string_view id) const;

    /// n x ids.size() matrix of the named columns, in the given order.
    [[nodiscard]] Matrix matrix(std::span<const std::string> ids) const;

  private:
    std::vector<std::string> regions_;
    std::vector<IndicatorColumn> columns_;
};

enum class MissingPolicy { reject, mean_impute, zero_fill };

MissingPolicy parse_missing_policy(std::string_view name);
std::string_view to_string(MissingPolicy policy) noexcept;

IndicatorTable parse_indicator_table(std::string_view csv_text, MissingPolicy policy,
                                     const std::string &provenance = {});
IndicatorTable load_indicator_table(const std::filesystem::path &path,
                                    MissingPolicy policy = MissingPolicy::reject);

std::vector<Region> parse_regions(const nlohmann::json &collection);
std::vector<Region> load_regions(const std::filesystem::path &path);

/// Gates CSV: gate_id,lat,lon,arrivals,buffer_km. An empty buffer_km means 25.
std::vector<Gate> parse_gates(std::string_view csv_text);
std::vector<Gate> load_gates(const std::filesystem::path &path);

/// Buffer rule for foreign arrivals: a region receives the full arrivals of
/// every gate whose buffer circle reaches its geometry (counts are duplicated,
/// not split). Output is in `regions` order.
std::vector<double> assign_gate_arrivals(std::span<const Region> regions,
                                         std::span<const Gate> gates);

/// Throws InvalidGeometry when the region has no polygon or a ring is invalid.
void validate_region(const Region &region);

} // namespace riskdex
