#include "semmatch/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "semmatch/errors.hpp"

namespace semmatch {
namespace {

double local_linear_at(std::span<const double> t, std::span<const double> y, std::size_t lo, std::size_t width,
                       std::size_t at) {
  const double t0 = t[at];
  double h = 0.0;
  for (std::size_t j = lo; j < lo + width; ++j) {
    h = std::max(h, std::abs(t[j] - t0));
  }
  if (h <= 0.0) {
    return y[at];
  }
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t j = lo; j < lo + width; ++j) {
    const double x = t[j] - t0;
    const double u = std::abs(x) / h;
    if (u >= 1.0) {
      continue;
    }
    const double c = 1.0 - u * u * u;
    const double w = c * c * c;
    s0 += w;
    s1 += w * x;
    s2 += w * x * x;
    sy += w * y[j];
    sxy += w * x * y[j];
  }
  const double det = s0 * s2 - s1 * s1;
  if (s0 <= 0.0) {
    return y[at];
  }
  if (std::abs(det) <= 1e-12 * s0 * s2) {
    return sy / s0;
  }
  return (s2 * sy - s1 * sxy) / det;
}

// Unwrapped sensor heading with interval lookups.
class HeadingTrack {
 public:
  explicit HeadingTrack(std::span<const SensorSample> sensors) : sensors_(sensors), unwrapped_(sensors.size()) {
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      unwrapped_[i] = i == 0 ? sensors[0].heading_deg
                             : unwrapped_[i - 1] + wrap_signed_deg(sensors[i].heading_deg - sensors[i - 1].heading_deg);
    }
  }

  std::optional<double> change(double t0, double t1, double max_gap_s) const {
    if (sensors_.empty() || t1 < t0 || t0 < sensors_.front().t || t1 > sensors_.back().t) {
      return std::nullopt;
    }
    const std::size_t a = bracket_low(t0);
    const std::size_t b = std::min(lower(t1), sensors_.size() - 1);
    for (std::size_t k = a + 1; k <= b; ++k) {
      if (sensors_[k].t - sensors_[k - 1].t > max_gap_s) {
        return std::nullopt;
      }
    }
    return at(t1) - at(t0);
  }

 private:
  std::size_t lower(double t) const {
    const auto it = std::lower_bound(sensors_.begin(), sensors_.end(), t,
                                     [](const SensorSample& s, double v) { return s.t < v; });
    return static_cast<std::size_t>(it - sensors_.begin());
  }

  std::size_t bracket_low(double t) const {
    const std::size_t k = lower(t);
    return (k < sensors_.size() && sensors_[k].t == t) || k == 0 ? k : k - 1;
  }

  double at(double t) const {
    const std::size_t k = lower(t);
    if (k < sensors_.size() && sensors_[k].t == t) {
      return unwrapped_[k];
    }
    const double ta = sensors_[k - 1].t;
    const double tb = sensors_[k].t;
    return unwrapped_[k - 1] + (t - ta) / (tb - ta) * (unwrapped_[k] - unwrapped_[k - 1]);
  }

  std::span<const SensorSample> sensors_;
  std::vector<double> unwrapped_;
};

}  // namespace

void FilterConfig::validate() const {
  if (speed_window < 1) {
    throw ConfigError("w_s must be >= 1");
  }
  if (!(max_speed_mps > 0.0)) {
    throw ConfigError("nu_max must be > 0");
  }
  if (!(speed_margin >= 0.0)) {
    throw ConfigError("speed_margin must be >= 0");
  }
  if (!(trim_alpha >= 0.0 && trim_alpha <= 0.5)) {
    throw ConfigError("alpha must lie in [0, 0.5]");
  }
  if (bounce_window < 3 || bounce_window % 2 == 0) {
    throw ConfigError("w_b must be odd and >= 3");
  }
  if (!(turn_threshold_deg > 0.0) || !(confirm_threshold_deg > 0.0)) {
    throw ConfigError("direction thresholds must be > 0");
  }
  if (!(sensor_max_gap_s > 0.0)) {
    throw ConfigError("sensor_max_gap_s must be > 0");
  }
}

std::vector<SensorSample> smooth_sensors(std::span<const SensorSample> stream, int bandwidth) {
  if (bandwidth < 3 || bandwidth % 2 == 0) {
    throw ConfigError("smoothing bandwidth must be odd and >= 3");
  }
  std::vector<SensorSample> out(stream.begin(), stream.end());
  const auto width = static_cast<std::size_t>(bandwidth);
  const std::size_t n = stream.size();
  if (n < width) {
    return out;
  }
  std::vector<double> t(n), g(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = stream[i].t;
    g[i] = stream[i].gravity_accel;
    h[i] = i == 0 ? stream[0].heading_deg : h[i - 1] + wrap_signed_deg(stream[i].heading_deg - stream[i - 1].heading_deg);
  }
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // slide to the `width` nearest samples in time
    while (lo + width < n && t[lo + width] - t[i] < t[i] - t[lo]) {
      ++lo;
    }
    out[i].gravity_accel = local_linear_at(t, g, lo, width, i);
    out[i].heading_deg = wrap_unsigned_deg(local_linear_at(t, h, lo, width, i));
  }
  return out;
}

double estimate_speed(std::span<const CleanFix> history, const RawFix& candidate) {
  if (history.empty()) {
    throw ValidationError("speed estimate needs at least one prior fix");
  }
  double sum = 0.0;
  for (const CleanFix& h : history) {
    const double dt = std::abs(candidate.t - h.t);
    if (dt == 0.0) {
      throw ValidationError("speed estimate needs distinct timestamps");
    }
    sum += geodesic_distance(h.loc, candidate.loc) / dt;
  }
  return sum / static_cast<double>(history.size());
}

std::vector<CleanFix> speed_filter(std::span<const RawFix> stream, const FilterConfig& config,
                                   const SpeedLimitLookup& limit_lookup) {
  config.validate();
  std::vector<CleanFix> out;
  out.reserve(stream.size());
  for (const RawFix& fix : stream) {
    CleanFix clean{fix.t, fix.loc, fix.err_m, {}};
    if (!out.empty()) {
      const auto window = static_cast<std::size_t>(config.speed_window);
      const std::size_t first = out.size() > window ? out.size() - window : 0;
      std::vector<CleanFix> history;
      for (std::size_t i = first; i < out.size(); ++i) {
        if (out[i].t != fix.t) {
          history.push_back(out[i]);
        }
      }
      if (!history.empty()) {
        std::optional<double> limit;
        if (limit_lookup) {
          limit = limit_lookup(out.back().loc);
        }
        const double threshold = limit.value_or(config.max_speed_mps) * (1.0 + config.speed_margin);
        if (estimate_speed(history, fix) > threshold) {
          clean.loc = out.back().loc;
          clean.flags.speed_rejected = true;
        }
      }
    }
    out.push_back(clean);
  }
  return out;
}

std::vector<std::uint32_t> spatial_sort_key(std::span<const GeoPoint> points, const GeoBox& box) {
  const double lat_extent = box.max_lat - box.min_lat;
  const double lon_extent = box.max_lon - box.min_lon;
  auto cell = [](double v, double lo, double extent) -> std::uint32_t {
    if (!(extent > 0.0)) {
      return 0;
    }
    const double f = std::floor((v - lo) / extent * kSpatialGridSize);
    return static_cast<std::uint32_t>(std::clamp(f, 0.0, static_cast<double>(kSpatialGridSize - 1)));
  };
  std::vector<std::uint32_t> keys;
  keys.reserve(points.size());
  for (const GeoPoint& p : points) {
    keys.push_back(cell(p.lat, box.min_lat, lat_extent) * kSpatialGridSize + cell(p.lon, box.min_lon, lon_extent));
  }
  return keys;
}

std::vector<CleanFix> trimmed_mean_filter(std::span<const CleanFix> stream, double alpha, int window) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) {
    throw ConfigError("alpha must lie in [0, 0.5]");
  }
  if (window < 3 || window % 2 == 0) {
    throw ConfigError("bounce window must be odd and >= 3");
  }
  std::vector<CleanFix> out(stream.begin(), stream.end());
  const auto width = static_cast<std::size_t>(window);
  const std::size_t n = stream.size();
  if (n < width) {
    return out;
  }
  const auto trim = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(width)));
  std::vector<GeoPoint> pts(width);
  std::vector<std::size_t> order(width);
  std::vector<char> kept(width);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = std::min(i >= width / 2 ? i - width / 2 : 0, n - width);
    for (std::size_t j = 0; j < width; ++j) {
      pts[j] = stream[lo + j].loc;
    }
    const auto keys = spatial_sort_key(pts, GeoBox::around(pts));
    std::iota(order.begin(), order.end(), std::size_t{0});
    // window positions are in time order, so index breaks key ties by timestamp
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::fill(kept.begin(), kept.end(), 0);
    for (std::size_t r = trim; r < width - trim; ++r) {
      kept[order[r]] = 1;
    }
    double lat = 0.0, lon = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < width; ++j) {
      if (kept[j]) {
        lat += pts[j].lat;
        lon += pts[j].lon;
        ++count;
      }
    }
    const GeoPoint smoothed{lat / static_cast<double>(count), lon / static_cast<double>(count)};
    if (!(smoothed == out[i].loc)) {
      out[i].loc = smoothed;
      out[i].flags.bounce_smoothed = true;
    }
  }
  return out;
}

std::optional<double> sensor_heading_change(std::span<const SensorSample> sensors, double t0, double t1,
                                            double max_gap_s) {
  return HeadingTrack(sensors).change(t0, t1, max_gap_s);
}

std::vector<CleanFix> direction_filter(std::span<const CleanFix> fixes, std::span<const SensorSample> sensors,
                                       const FilterConfig& config) {
  config.validate();
  std::vector<CleanFix> out;
  out.reserve(fixes.size());

  const HeadingTrack track(sensors);

  bool have_leg = false;
  double leg_bearing = 0.0;
  double leg_start_t = 0.0;
  for (const CleanFix& fix : fixes) {
    CleanFix cur = fix;
    if (out.empty()) {
      out.push_back(cur);
      continue;
    }
    const CleanFix& prev = out.back();
    if (prev.loc == cur.loc) {
      out.push_back(cur);
      continue;
    }
    const double b = bearing(prev.loc, cur.loc);
    if (have_leg) {
      const double change = wrap_signed_deg(b - leg_bearing);
      if (std::abs(change) > config.turn_threshold_deg) {
        const auto sensed = track.change(leg_start_t, cur.t, config.sensor_max_gap_s);
        if (!sensed) {
          cur.flags.sensor_gap = true;
        } else if (std::abs(*sensed) < config.confirm_threshold_deg) {
          cur.loc = prev.loc;
          cur.flags.direction_rejected = true;
          out.push_back(cur);
          continue;
        }
      }
    }
    have_leg = true;
    leg_bearing = b;
    leg_start_t = prev.t;
    out.push_back(cur);
  }
  return out;
}

std::vector<CleanFix> preprocess_fixes(std::span<const RawFix> raw, std::span<const SensorSample> sensors,
                                       const FilterConfig& config, const SpeedLimitLookup& limit_lookup) {
  auto fixes = speed_filter(raw, config, limit_lookup);
  fixes = trimmed_mean_filter(fixes, config.trim_alpha, config.bounce_window);
  if (!sensors.empty()) {
    fixes = direction_filter(fixes, sensors, config);
  }
  return fixes;
}

}  // namespace semmatch
