#include "semmatch/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "semmatch/errors.hpp"
#include "semmatch/path_finder.hpp"

namespace semmatch {
namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using BoxPoint = bg::model::point<double, 2, bg::cs::cartesian>;  // (lon, lat)
using Box = bg::model::box<BoxPoint>;
using IndexEntry = std::pair<BoxPoint, StateId>;

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kNodeCellDeg = 1e-4;

// Degree boxes covering the spherical cap of the given radius; two boxes when
// the cap crosses the antimeridian.
std::vector<Box> cap_boxes(const GeoPoint& c, double radius_m) {
  const double delta = radius_m / kEarthRadiusM;
  const double pad = 1e-9;
  const double dlat = delta * kRadToDeg + pad;
  const double lat_lo = std::max(-90.0, c.lat - dlat);
  const double lat_hi = std::min(90.0, c.lat + dlat);
  const double cos_lat = std::cos(c.lat * kDegToRad);
  const double s = std::sin(std::min(delta, std::numbers::pi / 2));
  bool full_lon = lat_hi >= 90.0 || lat_lo <= -90.0 || delta >= std::numbers::pi / 2 || s >= cos_lat;
  double dlon = 180.0;
  if (!full_lon) {
    dlon = std::asin(s / cos_lat) * kRadToDeg + pad;
    full_lon = dlon >= 180.0;
  }
  if (full_lon) {
    return {Box{BoxPoint{-180.0, lat_lo}, BoxPoint{180.0, lat_hi}}};
  }
  const double lo = c.lon - dlon;
  const double hi = c.lon + dlon;
  std::vector<Box> boxes{Box{BoxPoint{std::max(lo, -180.0), lat_lo}, BoxPoint{std::min(hi, 180.0), lat_hi}}};
  if (lo < -180.0) {
    boxes.push_back(Box{BoxPoint{lo + 360.0, lat_lo}, BoxPoint{180.0, lat_hi}});
  }
  if (hi > 180.0) {
    boxes.push_back(Box{BoxPoint{-180.0, lat_lo}, BoxPoint{hi - 360.0, lat_hi}});
  }
  return boxes;
}

}  // namespace

struct RoadNetwork::SpatialIndex {
  bgi::rtree<IndexEntry, bgi::rstar<16>> tree;
};

RoadNetwork::RoadNetwork(std::vector<RoadSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw ValidationError("road network has no segments");
  }

  // per-segment geometry and landmark placement
  lengths_.reserve(segments_.size());
  vertex_offsets_.reserve(segments_.size());
  for (SegmentIndex i = 0; i < segments_.size(); ++i) {
    RoadSegment& seg = segments_[i];
    if (seg.id.empty()) {
      throw ValidationError("segment #" + std::to_string(i) + " has an empty id");
    }
    if (!by_id_.emplace(seg.id, i).second) {
      throw ValidationError("duplicate segment id '" + seg.id + "'");
    }
    if (seg.polyline.size() < 2) {
      throw ValidationError("segment '" + seg.id + "' needs at least two vertices");
    }
    if (seg.speed_limit_mps && !(*seg.speed_limit_mps > 0.0 && std::isfinite(*seg.speed_limit_mps))) {
      throw ValidationError("segment '" + seg.id + "' has a non-positive speed limit");
    }
    std::vector<double> offsets{0.0};
    for (std::size_t v = 0; v < seg.polyline.size(); ++v) {
      validate(seg.polyline[v]);
      if (v > 0) {
        offsets.push_back(offsets.back() + geodesic_distance(seg.polyline[v - 1], seg.polyline[v]));
      }
    }
    if (!(offsets.back() > 0.0)) {
      throw ValidationError("segment '" + seg.id + "' has zero length");
    }
    for (auto& lm : seg.landmarks) {
      if (!is_landmark_type(lm.type)) {
        throw ValidationError("segment '" + seg.id + "' carries a no_class landmark");
      }
      validate(lm.loc);
      const PolylineProjection proj = project_onto(seg.polyline, lm.loc);
      if (proj.distance_m > kLandmarkToleranceM) {
        throw ValidationError("landmark at (" + std::to_string(lm.loc.lat) + ", " + std::to_string(lm.loc.lon) +
                              ") lies " + std::to_string(proj.distance_m) + " m off segment '" + seg.id + "'");
      }
      lm.offset_m = std::clamp(proj.offset_m, 0.0, offsets.back());
    }
    std::stable_sort(seg.landmarks.begin(), seg.landmarks.end(),
                     [](const SemanticLandmark& a, const SemanticLandmark& b) { return a.offset_m < b.offset_m; });
    for (std::size_t k = 1; k < seg.landmarks.size(); ++k) {
      if (seg.landmarks[k].offset_m == seg.landmarks[k - 1].offset_m) {
        throw ValidationError("segment '" + seg.id + "' has two landmarks at the same offset");
      }
    }
    total_length_m_ += offsets.back();
    lengths_.push_back(offsets.back());
    vertex_offsets_.push_back(std::move(offsets));
  }

  // topology: merge nearby endpoints into nodes
  std::vector<GeoPoint> node_locs;
  std::unordered_map<long long, std::vector<NodeIndex>> cells;
  auto cell_key = [](long long a, long long b) { return a * 4'000'003LL + b; };
  auto node_for = [&](const GeoPoint& p) -> NodeIndex {
    const auto ca = static_cast<long long>(std::floor(p.lat / kNodeCellDeg));
    const auto cb = static_cast<long long>(std::floor(p.lon / kNodeCellDeg));
    for (long long da = -1; da <= 1; ++da) {
      for (long long db = -1; db <= 1; ++db) {
        const auto it = cells.find(cell_key(ca + da, cb + db));
        if (it == cells.end()) {
          continue;
        }
        for (NodeIndex n : it->second) {
          if (geodesic_distance(node_locs[n], p) <= kNodeMergeToleranceM) {
            return n;
          }
        }
      }
    }
    const auto n = static_cast<NodeIndex>(node_locs.size());
    node_locs.push_back(p);
    cells[cell_key(ca, cb)].push_back(n);
    incident_.emplace_back();
    return n;
  };
  ends_.reserve(segments_.size());
  for (SegmentIndex i = 0; i < segments_.size(); ++i) {
    const NodeIndex a = node_for(segments_[i].polyline.front());
    const NodeIndex b = node_for(segments_[i].polyline.back());
    ends_.emplace_back(a, b);
    incident_[a].push_back(i);
    if (b != a) {
      incident_[b].push_back(i);
    }
  }

  // state space
  first_state_.reserve(segments_.size() + 1);
  for (SegmentIndex i = 0; i < segments_.size(); ++i) {
    first_state_.push_back(static_cast<StateId>(states_.size()));
    const auto& lms = segments_[i].landmarks;
    for (std::uint32_t r = 0; r < lms.size(); ++r) {
      HiddenState s;
      s.id = static_cast<StateId>(states_.size());
      s.segment = i;
      s.rank = r;
      s.type = lms[r].type;
      s.loc = lms[r].loc;
      s.offset_m = lms[r].offset_m;
      s.bearing_deg = heading_at(i, lms[r].offset_m);
      states_.push_back(s);
    }
  }
  first_state_.push_back(static_cast<StateId>(states_.size()));

  std::vector<IndexEntry> entries;
  entries.reserve(states_.size());
  for (const auto& s : states_) {
    entries.emplace_back(BoxPoint{s.loc.lon, s.loc.lat}, s.id);
  }
  index_ = std::make_unique<SpatialIndex>();
  index_->tree = decltype(index_->tree)(entries.begin(), entries.end());  // packing (bulk) load
}

RoadNetwork::~RoadNetwork() = default;
RoadNetwork::RoadNetwork(RoadNetwork&&) noexcept = default;
RoadNetwork& RoadNetwork::operator=(RoadNetwork&&) noexcept = default;

std::optional<SegmentIndex> RoadNetwork::find_segment(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const HiddenState& RoadNetwork::state(StateId id) const {
  if (id >= states_.size()) {
    throw std::out_of_range("unknown state id " + std::to_string(id));
  }
  return states_[id];
}

std::span<const HiddenState> RoadNetwork::states_on(SegmentIndex i) const {
  if (i >= segments_.size()) {
    throw std::out_of_range("unknown segment index " + std::to_string(i));
  }
  return std::span<const HiddenState>(states_).subspan(first_state_[i], first_state_[i + 1] - first_state_[i]);
}

GeoPoint RoadNetwork::point_at(SegmentIndex i, double offset_m) const {
  const auto& offs = vertex_offsets_.at(i);
  const auto& poly = segments_[i].polyline;
  const double o = std::clamp(offset_m, 0.0, offs.back());
  auto it = std::upper_bound(offs.begin(), offs.end(), o);
  std::size_t piece = it == offs.end() ? offs.size() - 2 : static_cast<std::size_t>(it - offs.begin()) - 1;
  piece = std::min(piece, offs.size() - 2);
  const double span = offs[piece + 1] - offs[piece];
  const double f = span > 0.0 ? (o - offs[piece]) / span : 0.0;
  return lerp(poly[piece], poly[piece + 1], f);
}

double RoadNetwork::heading_at(SegmentIndex i, double offset_m) const {
  const auto& offs = vertex_offsets_.at(i);
  const auto& poly = segments_[i].polyline;
  const double o = std::clamp(offset_m, 0.0, offs.back());
  auto it = std::upper_bound(offs.begin(), offs.end(), o);
  std::size_t piece = it == offs.end() ? offs.size() - 2 : static_cast<std::size_t>(it - offs.begin()) - 1;
  piece = std::min(piece, offs.size() - 2);
  // skip zero-length pieces
  while (piece + 1 < poly.size() - 1 && poly[piece] == poly[piece + 1]) {
    ++piece;
  }
  while (piece > 0 && poly[piece] == poly[piece + 1]) {
    --piece;
  }
  return bearing(poly[piece], poly[piece + 1]);
}

std::vector<StateId> RoadNetwork::query_radius(const GeoPoint& center, double radius_m) const {
  std::vector<StateId> out;
  if (!(radius_m >= 0.0)) {
    return out;
  }
  std::vector<IndexEntry> hits;
  for (const Box& box : cap_boxes(center, radius_m)) {
    index_->tree.query(bgi::intersects(box), std::back_inserter(hits));
  }
  for (const auto& [pt, id] : hits) {
    if (geodesic_distance(states_[id].loc, center) <= radius_m) {
      out.push_back(id);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool RoadNetwork::connected(StateId from, StateId to, double max_travel_m) const {
  const HiddenState& a = state(from);
  const HiddenState& b = state(to);
  if (a.segment == b.segment) {
    return true;
  }
  PathFinder finder(*this, 4);
  return finder.distance(from, to, max_travel_m).has_value();
}

std::vector<SemanticLandmark> RoadNetwork::semantics_between(StateId from, StateId to) const {
  PathFinder finder(*this, 4);
  const auto r = finder.route(from, to);
  if (!r) {
    throw UnreachableError("state " + std::to_string(to) + " is unreachable from state " + std::to_string(from));
  }
  std::vector<SemanticLandmark> out;
  for (StateId id : finder.skipped_states(*r, from, to)) {
    const HiddenState& s = states_[id];
    out.push_back(segments_[s.segment].landmarks[s.rank]);
  }
  return out;
}

std::optional<double> RoadNetwork::speed_limit_near(const GeoPoint& p, double radius_m) const {
  std::optional<double> best;
  for (StateId id : query_radius(p, radius_m)) {
    const auto& lim = segments_[states_[id].segment].speed_limit_mps;
    if (!lim) {
      return std::nullopt;
    }
    best = best ? std::max(*best, *lim) : *lim;
  }
  return best;
}

}  // namespace semmatch
