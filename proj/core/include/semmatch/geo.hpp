#pragma once

#include <span>

namespace semmatch {

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// WGS84 coordinate in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// True when both coordinates are finite, lat in [-90, 90], lon in [-180, 180).
bool is_valid(const GeoPoint& p) noexcept;

/// Throws ValidationError unless is_valid(p).
void validate(const GeoPoint& p);

/// Great-circle (haversine) distance in meters on a sphere of kEarthRadiusM.
double geodesic_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Initial great-circle bearing from a to b in [0, 360). Throws GeometryError
/// when the points coincide.
double bearing(const GeoPoint& a, const GeoPoint& b);

/// Point reached by travelling distance_m from origin along bearing_deg.
GeoPoint destination(const GeoPoint& origin, double bearing_deg, double distance_m) noexcept;

/// Angle wrapped into (-180, 180].
double wrap_signed_deg(double deg) noexcept;

/// Angle wrapped into [0, 360).
double wrap_unsigned_deg(double deg) noexcept;

/// Linear interpolation in coordinate space; adequate for sub-kilometre pieces.
GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double fraction) noexcept;

/// Axis-aligned box in degrees.
struct GeoBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;

  static GeoBox around(std::span<const GeoPoint> points) noexcept;
};

/// Projection of a point onto a polyline.
struct PolylineProjection {
  double offset_m = 0.0;    ///< arc length from the first vertex to the foot point
  double distance_m = 0.0;  ///< geodesic distance from the point to the foot point
  GeoPoint foot;
};

/// Closest point of the polyline to p, using a local equirectangular frame per
/// piece. The polyline must hold at least two vertices.
PolylineProjection project_onto(std::span<const GeoPoint> polyline, const GeoPoint& p);

}  // namespace semmatch
