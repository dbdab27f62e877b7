#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "semmatch/geo.hpp"

namespace semmatch {

/// World-frame inertial reading.
struct SensorSample {
  double t = 0.0;              ///< seconds, strictly increasing within a stream
  double gravity_accel = 0.0;  ///< vertical acceleration, m/s^2
  double heading_deg = 0.0;    ///< [0, 360)
};

/// Position estimate as delivered by the positioning source.
struct RawFix {
  double t = 0.0;
  GeoPoint loc;
  double err_m = 1.0;  ///< 1-sigma location error
};

struct FixFlags {
  bool speed_rejected = false;
  bool bounce_smoothed = false;
  bool direction_rejected = false;
  bool sensor_gap = false;  ///< direction check skipped for lack of sensor coverage
};

struct CleanFix {
  double t = 0.0;
  GeoPoint loc;
  double err_m = 1.0;
  FixFlags flags;
};

struct FilterConfig {
  int speed_window = 3;            ///< w_s
  double max_speed_mps = 50.0;     ///< physical cap used when the map has no limit
  double speed_margin = 0.2;       ///< tolerated fraction above the limit
  double trim_alpha = 0.2;         ///< in [0, 0.5]
  int bounce_window = 5;           ///< w_b, odd
  double turn_threshold_deg = 30.0;
  double confirm_threshold_deg = 10.0;
  double sensor_max_gap_s = 5.0;   ///< larger gaps count as missing coverage

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Local linear regression (tricube weights over the `bandwidth` nearest
/// samples in time) applied to gravity and to unwrapped heading.
/// Streams shorter than the bandwidth are returned unchanged.
std::vector<SensorSample> smooth_sensors(std::span<const SensorSample> stream, int bandwidth);

/// Mean of the pairwise speeds between the candidate and each history fix,
/// using |t_p - t_i|. Throws ValidationError on empty history or a zero time gap.
double estimate_speed(std::span<const CleanFix> history, const RawFix& candidate);

/// Posted limit at a location, if the map knows one.
using SpeedLimitLookup = std::function<std::optional<double>(const GeoPoint&)>;

/// Rejects fixes implying a speed above limit * (1 + margin). Rejected fixes
/// keep the previous location. Output length equals input length.
std::vector<CleanFix> speed_filter(std::span<const RawFix> stream, const FilterConfig& config,
                                   const SpeedLimitLookup& limit_lookup = {});

/// Row-major index of each point in a 64x64 grid laid over `box`. A zero
/// extent along one axis collapses that axis to cell 0.
std::vector<std::uint32_t> spatial_sort_key(std::span<const GeoPoint> points, const GeoBox& box);

inline constexpr std::uint32_t kSpatialGridSize = 64;

/// Alpha-trimmed mean over a temporal window of `window` fixes: the window is
/// ordered along the spatial key (ties by time), floor(alpha * window) fixes
/// are dropped at each end and the rest are averaged coordinate-wise.
std::vector<CleanFix> trimmed_mean_filter(std::span<const CleanFix> stream, double alpha, int window);

/// Net change of the unwrapped sensor heading between t0 and t1, or nullopt
/// when the stream does not cover the interval.
std::optional<double> sensor_heading_change(std::span<const SensorSample> sensors, double t0, double t1,
                                            double max_gap_s);

/// Rejects fixes whose implied change of travel direction exceeds the turn
/// threshold while the sensors report less than the confirm threshold.
std::vector<CleanFix> direction_filter(std::span<const CleanFix> fixes, std::span<const SensorSample> sensors,
                                       const FilterConfig& config);

/// speed -> bouncing -> direction. The direction stage runs only when sensors
/// are supplied.
std::vector<CleanFix> preprocess_fixes(std::span<const RawFix> raw, std::span<const SensorSample> sensors,
                                       const FilterConfig& config, const SpeedLimitLookup& limit_lookup = {});

}  // namespace semmatch
