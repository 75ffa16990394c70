#include "riskdex/geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace riskdex::geo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

using Vec3 = std::array<double, 3>;

Vec3 to_unit(LonLat p) noexcept {
    const double lat = p.lat * kDegToRad;
    const double lon = p.lon * kDegToRad;
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

LonLat from_unit(const Vec3 &v) noexcept {
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {std::atan2(v[1], v[0]) / kDegToRad, std::asin(std::clamp(v[2] / norm, -1.0, 1.0)) / kDegToRad};
}

bool ring_contains(const Ring &ring, LonLat p) noexcept {
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const auto &a = ring[i];
        const auto &b = ring[j];
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            const double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
            if (p.lon < x) {
                inside = !inside;
            }
        }
    }
    return inside;
}

// Minimum distance from p to the great-circle arc a-b, sampled at <= step_km.
double arc_distance_km(LonLat a, LonLat b, LonLat p, double step_km, double best) noexcept {
    const double da = haversine_km(a, p);
    const double db = haversine_km(b, p);
    best = std::min({best, da, db});
    const double length = haversine_km(a, b);
    // Every point of the arc is within `length` of both endpoints.
    if (std::max(da, db) - length >= best || length <= step_km) {
        return best;
    }
    const auto steps = static_cast<int>(std::ceil(length / step_km));
    const Vec3 ua = to_unit(a);
    const Vec3 ub = to_unit(b);
    const double omega = length / kEarthRadiusKm;
    const double sin_omega = std::sin(omega);
    for (int s = 1; s < steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        const double wa = std::sin((1.0 - t) * omega) / sin_omega;
        const double wb = std::sin(t * omega) / sin_omega;
        const Vec3 v{wa * ua[0] + wb * ub[0], wa * ua[1] + wb * ub[1], wa * ua[2] + wb * ub[2]};
        best = std::min(best, haversine_km(from_unit(v), p));
    }
    return best;
}

double ring_distance_km(const Ring &ring, LonLat p, double step_km, double best) noexcept {
    for (std::size_t i = 1; i < ring.size(); ++i) {
        best = arc_distance_km(ring[i - 1], ring[i], p, step_km, best);
    }
    return best;
}

} // namespace

double haversine_km(LonLat a, LonLat b) noexcept {
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;
    const double s = std::sin(dlat / 2.0);
    const double t = std::sin(dlon / 2.0);
    const double h = s * s + std::cos(a.lat * kDegToRad) * std::cos(b.lat * kDegToRad) * t * t;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

bool contains(const Polygon &polygon, LonLat point) noexcept {
    if (!ring_contains(polygon.outer, point)) {
        return false;
    }
    return std::none_of(polygon.holes.begin(), polygon.holes.end(),
                        [&](const Ring &hole) { return ring_contains(hole, point); });
}

double distance_to_polygons_km(const std::vector<Polygon> &polygons, LonLat point, double step_km,
                               double cutoff_km) noexcept {
    for (const auto &polygon : polygons) {
        if (contains(polygon, point)) {
            return 0.0;
        }
    }
    double best = cutoff_km;
    for (const auto &polygon : polygons) {
        best = ring_distance_km(polygon.outer, point, step_km, best);
        for (const auto &hole : polygon.holes) {
            best = ring_distance_km(hole, point, step_km, best);
        }
    }
    return best;
}

bool is_valid_ring(const Ring &ring) noexcept {
    if (ring.size() < 4 || !(ring.front() == ring.back())) {
        return false;
    }
    return std::all_of(ring.begin(), ring.end(), [](const LonLat &p) {
        return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lat >= -90.0 && p.lat <= 90.0 &&
               p.lon >= -180.0 && p.lon <= 180.0;
    });
}

} // namespace riskdex::geo
