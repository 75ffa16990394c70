#pragma once

#include <vector>

namespace riskdex::geo {

/// Mean Earth radius (IUGG), kilometres.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// WGS84 position in degrees.
struct LonLat {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const LonLat &, const LonLat &) = default;
};

/// Closed ring: first position equals last.
using Ring = std::vector<LonLat>;

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
};

/// Great-circle distance in kilometres.
double haversine_km(LonLat a, LonLat b) noexcept;

/// Even-odd containment in the lon/lat plane; points inside a hole are outside.
bool contains(const Polygon &polygon, LonLat point) noexcept;

/// Shortest great-circle distance from `point` to any boundary of `polygons`,
/// or 0 when the point lies inside one of them. Edges are sampled along the
/// great circle at steps no longer than `step_km`. Edges that provably stay
/// farther than `cutoff_km` are skipped, so results above the cutoff are only
/// lower-bounded by it.
double distance_to_polygons_km(const std::vector<Polygon> &polygons, LonLat point,
                               double step_km = 1.0, double cutoff_km = 1e300) noexcept;

/// True when the ring has at least four positions, is closed and every
/// position is inside the WGS84 coordinate range.
bool is_valid_ring(const Ring &ring) noexcept;

} // namespace riskdex::geo
