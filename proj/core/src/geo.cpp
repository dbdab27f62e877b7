#include "semmatch/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "semmatch/errors.hpp"

namespace semmatch {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

bool is_valid(const GeoPoint& p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon < 180.0;
}

void validate(const GeoPoint& p) {
  if (!is_valid(p)) {
    throw ValidationError("coordinate out of range: lat=" + std::to_string(p.lat) +
                          " lon=" + std::to_string(p.lon));
  }
}

double geodesic_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

double bearing(const GeoPoint& a, const GeoPoint& b) {
  if (a == b) {
    throw GeometryError("bearing undefined for coincident points");
  }
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return wrap_unsigned_deg(std::atan2(y, x) * kRadToDeg);
}

GeoPoint destination(const GeoPoint& origin, double bearing_deg, double distance_m) noexcept {
  const double delta = distance_m / kEarthRadiusM;
  const double theta = bearing_deg * kDegToRad;
  const double phi1 = origin.lat * kDegToRad;
  const double lambda1 = origin.lon * kDegToRad;
  const double sin_phi2 =
      std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
  const double lambda2 =
      lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                           std::cos(delta) - std::sin(phi1) * sin_phi2);
  double lon = lambda2 * kRadToDeg;
  lon = std::fmod(lon + 540.0, 360.0) - 180.0;
  return {phi2 * kRadToDeg, lon};
}

double wrap_signed_deg(double deg) noexcept {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) {
    r += 360.0;
  } else if (r > 180.0) {
    r -= 360.0;
  }
  return r;
}

double wrap_unsigned_deg(double deg) noexcept {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) {
    r += 360.0;
  }
  // fmod of a tiny negative value can round up to exactly 360
  return r >= 360.0 ? 0.0 : r;
}

GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double fraction) noexcept {
  return {a.lat + (b.lat - a.lat) * fraction, a.lon + (b.lon - a.lon) * fraction};
}

GeoBox GeoBox::around(std::span<const GeoPoint> points) noexcept {
  GeoBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    box.min_lat = std::min(box.min_lat, p.lat);
    box.min_lon = std::min(box.min_lon, p.lon);
    box.max_lat = std::max(box.max_lat, p.lat);
    box.max_lon = std::max(box.max_lon, p.lon);
  }
  return box;
}

PolylineProjection project_onto(std::span<const GeoPoint> polyline, const GeoPoint& p) {
  if (polyline.size() < 2) {
    throw GeometryError("polyline needs at least two vertices");
  }
  PolylineProjection best{0.0, std::numeric_limits<double>::infinity(), polyline.front()};
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const GeoPoint& a = polyline[i];
    const GeoPoint& b = polyline[i + 1];
    const double piece = geodesic_distance(a, b);
    const double kx = std::cos(a.lat * kDegToRad);
    const double bx = (b.lon - a.lon) * kx;
    const double by = b.lat - a.lat;
    const double px = (p.lon - a.lon) * kx;
    const double py = p.lat - a.lat;
    const double len2 = bx * bx + by * by;
    const double t = len2 > 0.0 ? std::clamp((px * bx + py * by) / len2, 0.0, 1.0) : 0.0;
    const GeoPoint foot = lerp(a, b, t);
    const double d = geodesic_distance(p, foot);
    if (d < best.distance_m) {
      best = {walked + t * piece, d, foot};
    }
    walked += piece;
  }
  return best;
}

}  // namespace semmatch
