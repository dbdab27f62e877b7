#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semmatch/geo.hpp"
#include "semmatch/semantic_type.hpp"

namespace semmatch {

using SegmentIndex = std::uint32_t;
using NodeIndex = std::uint32_t;
using StateId = std::uint32_t;

/// Maximum distance between a landmark and its segment polyline.
inline constexpr double kLandmarkToleranceM = 1.0;

/// Endpoints closer than this are merged into one graph node.
inline constexpr double kNodeMergeToleranceM = 0.5;

struct SemanticLandmark {
  SemanticType type = SemanticType::Bump;
  GeoPoint loc;
  double offset_m = 0.0;  ///< arc length along the parent polyline; computed at load
};

struct RoadSegment {
  std::string id;
  std::vector<GeoPoint> polyline;
  std::optional<double> speed_limit_mps;
  std::vector<SemanticLandmark> landmarks;
};

/// One landmark on one segment: the unit of the HMM state space.
struct HiddenState {
  StateId id = 0;
  SegmentIndex segment = 0;
  std::uint32_t rank = 0;  ///< position in the segment's sorted landmark list
  SemanticType type = SemanticType::Bump;
  GeoPoint loc;
  double offset_m = 0.0;
  double bearing_deg = 0.0;  ///< polyline direction at the landmark, [0, 360)
};

/// A contiguous traversal of part of one segment. Offsets are arc lengths;
/// from > to means the segment is travelled against polyline direction.
struct RouteLeg {
  SegmentIndex segment = 0;
  double from_offset_m = 0.0;
  double to_offset_m = 0.0;

  double length_m() const noexcept {
    return from_offset_m <= to_offset_m ? to_offset_m - from_offset_m : from_offset_m - to_offset_m;
  }
  bool forward() const noexcept { return from_offset_m <= to_offset_m; }
};

struct Route {
  double length_m = 0.0;
  std::vector<RouteLeg> legs;
};

/// Immutable, semantically enriched road graph. Segments are undirected;
/// endpoints within kNodeMergeToleranceM share a node. Every landmark becomes
/// a HiddenState; state ids are ordered by (segment, offset).
class RoadNetwork {
 public:
  /// Validates and indexes the segments. Landmark offsets are (re)computed
  /// by projection and landmarks are sorted along each segment.
  /// Throws ValidationError on any invariant violation.
  explicit RoadNetwork(std::vector<RoadSegment> segments);
  ~RoadNetwork();
  RoadNetwork(RoadNetwork&&) noexcept;
  RoadNetwork& operator=(RoadNetwork&&) noexcept;
  RoadNetwork(const RoadNetwork&) = delete;
  RoadNetwork& operator=(const RoadNetwork&) = delete;

  std::span<const RoadSegment> segments() const noexcept { return segments_; }
  const RoadSegment& segment(SegmentIndex i) const { return segments_.at(i); }
  std::optional<SegmentIndex> find_segment(std::string_view id) const;
  double segment_length(SegmentIndex i) const { return lengths_.at(i); }
  NodeIndex start_node(SegmentIndex i) const { return ends_.at(i).first; }
  NodeIndex end_node(SegmentIndex i) const { return ends_.at(i).second; }
  std::size_t node_count() const noexcept { return incident_.size(); }
  std::span<const SegmentIndex> incident(NodeIndex n) const { return incident_.at(n); }
  double total_length_m() const noexcept { return total_length_m_; }

  std::span<const HiddenState> states() const noexcept { return states_; }
  const HiddenState& state(StateId id) const;
  /// States on segment i, in offset order.
  std::span<const HiddenState> states_on(SegmentIndex i) const;

  /// Point at the given arc length along a segment.
  GeoPoint point_at(SegmentIndex i, double offset_m) const;
  /// Polyline direction at the given arc length, [0, 360).
  double heading_at(SegmentIndex i, double offset_m) const;

  /// Ids (ascending) of all states within radius_m of center.
  std::vector<StateId> query_radius(const GeoPoint& center, double radius_m) const;

  /// True iff `to` is reachable from `from` with path arc length at most
  /// max_travel_m. States on the same segment are always connected.
  bool connected(StateId from, StateId to, double max_travel_m) const;

  /// Landmarks strictly between two states along the minimal arc-length path,
  /// in traversal order. Throws UnreachableError for disconnected pairs.
  std::vector<SemanticLandmark> semantics_between(StateId from, StateId to) const;

  /// Highest posted limit among segments with a landmark within radius_m of
  /// the point; nullopt when none is found or any of them is unposted.
  std::optional<double> speed_limit_near(const GeoPoint& p, double radius_m) const;

 private:
  struct SpatialIndex;

  std::vector<RoadSegment> segments_;
  std::vector<double> lengths_;
  std::vector<std::vector<double>> vertex_offsets_;
  std::vector<std::pair<NodeIndex, NodeIndex>> ends_;
  std::vector<std::vector<SegmentIndex>> incident_;
  std::vector<HiddenState> states_;
  std::vector<StateId> first_state_;  // per segment, plus a sentinel
  std::unordered_map<std::string, SegmentIndex> by_id_;
  double total_length_m_ = 0.0;
  std::unique_ptr<SpatialIndex> index_;
};

}  // namespace semmatch
