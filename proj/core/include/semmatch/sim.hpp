#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semmatch/eval.hpp"
#include "semmatch/preprocess.hpp"
#include "semmatch/road_network.hpp"
#include "semmatch/semantics.hpp"

namespace semmatch::sim {

/// Positioning error regime.
struct NoiseModel {
  std::string name;
  double err_mean_m = 1.0;      ///< mean radial error
  double updates_per_km = 1.0;  ///< fixes per travelled km
  double pingpong_prob = 0.0;   ///< chance a fix repeats an earlier emitted location
  int pingpong_depth = 0;       ///< how far back a repeat may reach

  void validate() const;

  /// "cellular", "network" or "gps_sparse". Throws ConfigError otherwise.
  static NoiseModel preset(std::string_view name);
};

/// Type mix proportional to the per-class totals of the default confusion counts.
std::array<double, kLandmarkTypeCount> default_type_mix() noexcept;

struct GridSpec {
  int rows = 6;               ///< node rows
  int cols = 6;               ///< node columns
  double block_m = 1000.0;    ///< distance between adjacent nodes
  GeoPoint origin{30.0, 31.0};
  double density_per_km = 2.0;
  std::array<double, kLandmarkTypeCount> type_mix = default_type_mix();
  double speed_limit_kmh = 60.0;
  std::uint64_t seed = 1;
};

/// Grid of straight two-vertex segments ("h<r>_<c>" eastward, "v<r>_<c>"
/// northward) with landmarks placed by a Poisson process along each segment.
/// Throws ConfigError for degenerate specs.
RoadNetwork generate_network(const GridSpec& spec);

struct TruthFix {
  double t = 0.0;
  GeoPoint loc;
  double heading_deg = 0.0;   ///< travel direction
  double distance_m = 0.0;    ///< travelled since the start of the route
  std::size_t leg = 0;
};

struct RouteSpec {
  double length_km = 10.0;
  double nominal_speed_mps = 12.0;
  double speed_jitter = 0.2;  ///< per-leg speed factor drawn from [1 - j, 1 + j]
};

struct SimRoute {
  std::vector<RouteLeg> legs;
  std::vector<double> leg_speeds;   ///< m/s, one per leg
  std::vector<double> leg_start_t;  ///< seconds, one per leg
  SegmentPath path;
  std::vector<TruthFix> fixes;      ///< 1 Hz ground truth
  bool truncated = false;           ///< walk hit a dead end before the requested length
};

/// Random walk without immediate backtracking, starting at one end of a
/// random segment. Throws ConfigError for a non-positive length or speed.
SimRoute sample_route(const RoadNetwork& network, const RouteSpec& spec, std::uint64_t seed);

struct EmittedEvent {
  SemanticEvent event;
  StateId true_state = 0;
};

struct EventDraw {
  std::vector<EmittedEvent> events;  ///< detected events, time-ordered
  std::vector<StateId> missed;       ///< landmarks passed whose detection drew NoClass
};

/// One detection per landmark passage, the detected type drawn from the
/// confusion row of the true type. The event location is the landmark
/// corrupted by `noise`; its heading is the travel direction plus Gaussian
/// sensor noise.
EventDraw emit_semantic_events(const SimRoute& route, const RoadNetwork& network, const ConfusionMatrix& confusion,
                               const NoiseModel& noise, std::uint64_t seed, double heading_noise_deg = 3.0);

struct CorruptedFixes {
  std::vector<RawFix> fixes;
  std::vector<std::size_t> truth_index;       ///< truth fix each output fix was drawn from
  std::vector<std::size_t> pingpong_indices;  ///< output fixes that repeat an earlier location
};

/// Subsamples the truth to noise.updates_per_km, adds isotropic Gaussian
/// noise with sigma = err_mean / sqrt(pi/2) per axis and injects ping-pong
/// repeats. The truth is not modified.
CorruptedFixes corrupt_positions(std::span<const TruthFix> truth, const NoiseModel& noise, std::uint64_t seed);

/// 1 Hz world-frame sensor samples along the truth.
std::vector<SensorSample> simulate_sensors(std::span<const TruthFix> truth, double heading_noise_deg,
                                           std::uint64_t seed);

struct SimTrace {
  std::string trace_id;
  SimRoute route;
  EventDraw events;
  CorruptedFixes fixes;
  std::vector<SensorSample> sensors;
};

/// Route, events, fixes and sensors for one seeded drive.
SimTrace simulate_trace(const RoadNetwork& network, const ConfusionMatrix& confusion, const NoiseModel& noise,
                        const RouteSpec& route, std::uint64_t seed);

}  // namespace semmatch::sim
