#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semmatch/eval.hpp"
#include "semmatch/matcher.hpp"
#include "semmatch/preprocess.hpp"
#include "semmatch/semantics.hpp"

namespace semmatch {

/// One event line of a trace file. Carries either a detected type or the
/// features to classify; location and heading are optional and otherwise
/// recovered from fixes and sensors.
struct TraceEvent {
  double t = 0.0;
  std::optional<SemanticType> type;
  std::optional<FeatureVector> features;
  std::optional<GeoPoint> loc;
  std::optional<double> err_m;
  std::optional<double> heading_deg;
};

/// JSON-lines trace:
///   {"trace_id": ...}                                   optional header
///   {"t", "lat", "lon", "err_m"}                        fix
///   {"t", "heading_deg", "gvar"}                        sensor
///   {"t", "type" | "features", ["lat", "lon", "err_m", "heading_deg"]}   event
/// Records of each kind are returned in time order.
struct Trace {
  std::string trace_id;
  std::vector<RawFix> fixes;
  std::vector<SensorSample> sensors;
  std::vector<TraceEvent> events;
};

/// Throws ParseError with the offending line number.
Trace read_trace(std::istream& in);
/// Throws ParseError naming the path.
Trace read_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const Trace& trace);

/// Audit entry for one simulated detection.
struct TruthEvent {
  double t = 0.0;
  std::string segment_id;
  std::uint32_t landmark = 0;  ///< rank of the true landmark on its segment
  SemanticType true_type = SemanticType::Bump;
  SemanticType detected_type = SemanticType::Bump;
};

/// Sidecar written next to a simulated trace. Shares the "trace_id" and
/// "path" keys with TracePath.
struct TraceTruth {
  std::string trace_id;
  SegmentPath path;
  std::vector<TruthEvent> events;
  std::size_t missed = 0;
  std::vector<std::size_t> pingpong_fix_indices;
  bool truncated = false;
};

TraceTruth read_truth(std::istream& in);
void write_truth(std::ostream& out, const TraceTruth& truth);

/// One JSON line per record: {"t", "segment_id", "lat", "lon", "loglik", "stale"}.
/// Unmatched records carry nulls; a log-likelihood of -inf is written as null.
void write_match_records(std::ostream& out, const RoadNetwork& network, const MatchOutput& output);

/// GeoJSON FeatureCollection with one LineString per route leg.
void write_path_geojson(std::ostream& out, const RoadNetwork& network, std::span<const RouteLeg> legs);

}  // namespace semmatch
