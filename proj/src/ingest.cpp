#include "riskdex/ingest.hpp"

#include "riskdex/csv.hpp"
#include "riskdex/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace riskdex {
namespace {

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::optional<double> parse_number(std::string_view text) {
    text = csv::trim(text);
    if (text.starts_with('+')) {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::string cell_ref(std::size_t row, const std::string &column) {
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

geo::Ring parse_ring(const nlohmann::json &coords, const std::string &region_id) {
    if (!coords.is_array()) {
        throw Error(ErrorCode::MalformedGeoJson, "ring of '" + region_id + "' is not an array");
    }
    geo::Ring ring;
    ring.reserve(coords.size());
    for (const auto &pos : coords) {
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
            throw Error(ErrorCode::MalformedGeoJson,
                        "bad position in geometry of '" + region_id + "'");
        }
        ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
    }
    if (!geo::is_valid_ring(ring)) {
        throw Error(ErrorCode::InvalidGeometry,
                    "ring of '" + region_id + "' is unclosed, too short or out of range");
    }
    return ring;
}

geo::Polygon parse_polygon(const nlohmann::json &rings, const std::string &region_id) {
    if (!rings.is_array() || rings.empty()) {
        throw Error(ErrorCode::InvalidGeometry, "empty polygon in '" + region_id + "'");
    }
    geo::Polygon polygon;
    polygon.outer = parse_ring(rings[0], region_id);
    for (std::size_t i = 1; i < rings.size(); ++i) {
        polygon.holes.push_back(parse_ring(rings[i], region_id));
    }
    return polygon;
}

std::string property_string(const nlohmann::json &value) {
    if (value.is_string()) {
        return value.get<std::string>();
    }
    if (value.is_number_integer()) {
        return std::to_string(value.get<long long>());
    }
    return value.dump();
}

} // namespace

void IndicatorTable::set_column(IndicatorColumn column) {
    if (column.values.size() != regions_.size()) {
        throw Error(ErrorCode::ColumnMismatch, "column '" + column.id + "' has " +
                                                   std::to_string(column.values.size()) +
                                                   " values for " +
                                                   std::to_string(regions_.size()) + " regions");
    }
    for (auto &existing : columns_) {
        if (existing.id == column.id) {
            existing = std::move(column);
            return;
        }
    }
    columns_.push_back(std::move(column));
}

bool IndicatorTable::has_column(std::string_view id) const noexcept {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const IndicatorColumn &c) { return c.id == id; });
}

const IndicatorColumn &IndicatorTable::column(std::string_view id) const {
    for (const auto &c : columns_) {
        if (c.id == id) {
            return c;
        }
    }
    throw Error(ErrorCode::MissingColumn, "no column '" + std::string(id) + "'");
}

Matrix IndicatorTable::matrix(std::span<const std::string> ids) const {
    Matrix m(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t j = 0; j < ids.size(); ++j) {
        const auto &values = column(ids[j]).values;
        for (std::size_t i = 0; i < values.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i];
        }
    }
    return m;
}

MissingPolicy parse_missing_policy(std::string_view name) {
    if (name == "reject") {
        return MissingPolicy::reject;
    }
    if (name == "mean_impute") {
        return MissingPolicy::mean_impute;
    }
    if (name == "zero_fill") {
        return MissingPolicy::zero_fill;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown missing_policy '" + std::string(name) + "'");
}

std::string_view to_string(MissingPolicy policy) noexcept {
    switch (policy) {
    case MissingPolicy::reject: return "reject";
    case MissingPolicy::mean_impute: return "mean_impute";
    case MissingPolicy::zero_fill: return "zero_fill";
    }
    return "reject";
}

IndicatorTable parse_indicator_table(std::string_view csv_text, MissingPolicy policy,
                                     const std::string &provenance) {
    const auto rows = csv::parse(csv_text);
    if (rows.size() < 2) {
        throw Error(ErrorCode::EmptyTable, "indicator table has no data rows");
    }
    const auto &header = rows.front();
    if (header.empty() || csv::trim(header[0]) != "region_id") {
        throw Error(ErrorCode::EmptyTable, "first header column must be 'region_id'");
    }
    const std::size_t ncols = header.size() - 1;

    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    std::vector<std::vector<std::optional<double>>> cells(ncols);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto &row = rows[r];
        if (row.size() != header.size()) {
            throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(r) + " has " +
                                                       std::to_string(row.size()) +
                                                       " fields, header has " +
                                                       std::to_string(header.size()));
        }
        std::string id(csv::trim(row[0]));
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::DuplicateRegionId, "region_id '" + id + "' repeated");
        }
        ids.push_back(std::move(id));
        for (std::size_t c = 0; c < ncols; ++c) {
            const auto text = csv::trim(row[c + 1]);
            if (text.empty()) {
                cells[c].emplace_back(std::nullopt);
                continue;
            }
            const auto value = parse_number(text);
            if (!value) {
                throw Error(ErrorCode::NonNumericCell,
                            cell_ref(r, header[c + 1]) + ": '" + std::string(text) + "'");
            }
            cells[c].emplace_back(*value);
        }
    }

    IndicatorTable table(std::move(ids));
    for (std::size_t c = 0; c < ncols; ++c) {
        const std::string name(csv::trim(header[c + 1]));
        double sum = 0.0;
        std::size_t present = 0;
        for (const auto &v : cells[c]) {
            if (v) {
                sum += *v;
                ++present;
            }
        }
        IndicatorColumn column{name, "", provenance, {}};
        column.values.reserve(cells[c].size());
        for (std::size_t r = 0; r < cells[c].size(); ++r) {
            const auto &v = cells[c][r];
            if (v) {
                column.values.push_back(*v);
                continue;
            }
            switch (policy) {
            case MissingPolicy::reject:
                throw Error(ErrorCode::MissingCell, cell_ref(r + 1, name) + " is empty");
            case MissingPolicy::mean_impute:
                if (present == 0) {
                    throw Error(ErrorCode::MissingCell,
                                "column '" + name + "' has no values to impute from");
                }
                column.values.push_back(sum / static_cast<double>(present));
                break;
            case MissingPolicy::zero_fill:
                column.values.push_back(0.0);
                break;
            }
        }
        table.set_column(std::move(column));
    }
    return table;
}

IndicatorTable load_indicator_table(const std::filesystem::path &path, MissingPolicy policy) {
    return parse_indicator_table(read_text(path), policy, path.filename().string());
}

std::vector<Region> parse_regions(const nlohmann::json &collection) {
    if (!collection.is_object() || collection.value("type", "") != "FeatureCollection" ||
        !collection.contains("features") || !collection["features"].is_array()) {
        throw Error(ErrorCode::MalformedGeoJson, "expected a FeatureCollection");
    }
    std::vector<Region> regions;
    std::unordered_set<std::string> seen;
    for (const auto &feature : collection["features"]) {
        if (!feature.is_object() || !feature.contains("geometry")) {
            throw Error(ErrorCode::MalformedGeoJson, "feature without geometry");
        }
        const auto &props = feature.contains("properties") ? feature["properties"]
                                                          : nlohmann::json::object();
        if (!props.is_object() || !props.contains("region_id") || props["region_id"].is_null()) {
            throw Error(ErrorCode::MissingRegionIdProperty,
                        "feature #" + std::to_string(regions.size()) + " lacks region_id");
        }
        Region region;
        region.region_id = property_string(props["region_id"]);
        if (!seen.insert(region.region_id).second) {
            throw Error(ErrorCode::DuplicateRegionId,
                        "region_id '" + region.region_id + "' repeated");
        }
        if (props.contains("name") && !props["name"].is_null()) {
            region.name = property_string(props["name"]);
        }
        if (props.contains("group_tag") && !props["group_tag"].is_null()) {
            region.group_tag = property_string(props["group_tag"]);
        }

        const auto &geometry = feature["geometry"];
        if (!geometry.is_object() || !geometry.contains("coordinates")) {
            throw Error(ErrorCode::InvalidGeometry,
                        "region '" + region.region_id + "' has no geometry");
        }
        const auto type = geometry.value("type", "");
        const auto &coords = geometry["coordinates"];
        if (type == "Polygon") {
            region.polygons.push_back(parse_polygon(coords, region.region_id));
        } else if (type == "MultiPolygon") {
            if (!coords.is_array()) {
                throw Error(ErrorCode::MalformedGeoJson, "bad MultiPolygon coordinates");
            }
            for (const auto &poly : coords) {
                region.polygons.push_back(parse_polygon(poly, region.region_id));
            }
        } else {
            throw Error(ErrorCode::InvalidGeometry, "region '" + region.region_id +
                                                        "' has unsupported geometry type '" +
                                                        type + "'");
        }
        validate_region(region);
        region.feature = feature;
        regions.push_back(std::move(region));
    }
    return regions;
}

std::vector<Region> load_regions(const std::filesystem::path &path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw Error(ErrorCode::MalformedGeoJson, path.string() + ": " + e.what());
    }
    return parse_regions(doc);
}

std::vector<Gate> parse_gates(std::string_view csv_text) {
    const auto rows = csv::parse(csv_text);
    if (rows.empty()) {
        throw Error(ErrorCode::EmptyTable, "gates file is empty");
    }
    const csv::Row expected{"gate_id", "lat", "lon", "arrivals", "buffer_km"};
    const auto &header = rows.front();
    if (header.size() != expected.size()) {
        throw Error(ErrorCode::InvalidGate, "gates header must be gate_id,lat,lon,arrivals,buffer_km");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (csv::trim(header[i]) != expected[i]) {
            throw Error(ErrorCode::InvalidGate,
                        "gates header must be gate_id,lat,lon,arrivals,buffer_km");
        }
    }
    std::vector<Gate> gates;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto &row = rows[r];
        if (row.size() != expected.size()) {
            throw Error(ErrorCode::InvalidGate, "gate row " + std::to_string(r) + " malformed");
        }
        Gate gate;
        gate.gate_id = std::string(csv::trim(row[0]));
        const auto lat = parse_number(row[1]);
        const auto lon = parse_number(row[2]);
        const auto arrivals = parse_number(row[3]);
        const auto buffer = csv::trim(row[4]).empty() ? std::optional<double>(25.0)
                                                      : parse_number(row[4]);
        if (!lat || !lon || !arrivals || !buffer) {
            throw Error(ErrorCode::InvalidGate, "gate '" + gate.gate_id + "' has a non-numeric field");
        }
        gate.location = {*lon, *lat};
        gate.arrivals = *arrivals;
        gate.buffer_km = *buffer;
        if (gate.arrivals < 0.0 || !(gate.buffer_km > 0.0) || *lat < -90.0 || *lat > 90.0 ||
            *lon < -180.0 || *lon > 180.0) {
            throw Error(ErrorCode::InvalidGate, "gate '" + gate.gate_id + "' is out of range");
        }
        gates.push_back(std::move(gate));
    }
    return gates;
}

std::vector<Gate> load_gates(const std::filesystem::path &path) {
    return parse_gates(read_text(path));
}

void validate_region(const Region &region) {
    if (region.polygons.empty()) {
        throw Error(ErrorCode::InvalidGeometry, "region '" + region.region_id + "' is empty");
    }
    for (const auto &polygon : region.polygons) {
        if (!geo::is_valid_ring(polygon.outer)) {
            throw Error(ErrorCode::InvalidGeometry,
                        "region '" + region.region_id + "' has an invalid ring");
        }
        for (const auto &hole : polygon.holes) {
            if (!geo::is_valid_ring(hole)) {
                throw Error(ErrorCode::InvalidGeometry,
                            "region '" + region.region_id + "' has an invalid hole");
            }
        }
    }
}

std::vector<double> assign_gate_arrivals(std::span<const Region> regions,
                                         std::span<const Gate> gates) {
    if (regions.empty()) {
        throw Error(ErrorCode::EmptyRegionList, "no regions to assign gate arrivals to");
    }
    for (const auto &region : regions) {
        validate_region(region);
    }
    std::vector<double> totals(regions.size(), 0.0);
    for (std::size_t r = 0; r < regions.size(); ++r) {
        for (const auto &gate : gates) {
            const double d = geo::distance_to_polygons_km(regions[r].polygons, gate.location, 1.0,
                                                          gate.buffer_km * 2.0 + 1.0);
            if (d <= gate.buffer_km) {
                totals[r] += gate.arrivals;
            }
        }
    }
    return totals;
}

} // namespace riskdex
