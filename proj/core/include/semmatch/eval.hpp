#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semmatch/road_network.hpp"

namespace semmatch {

struct PathElement {
  std::string segment_id;
  double length_m = 0.0;  ///< distance traversed on the segment

  friend bool operator==(const PathElement&, const PathElement&) = default;
};

/// Ordered traversal of segments. Consecutive repeats of a segment id are
/// merged and zero-length elements dropped on construction.
class SegmentPath {
 public:
  SegmentPath() = default;
  explicit SegmentPath(std::vector<PathElement> elements);

  void append(std::string segment_id, double length_m);

  std::span<const PathElement> elements() const noexcept { return elements_; }
  bool empty() const noexcept { return elements_.empty(); }
  std::size_t size() const noexcept { return elements_.size(); }
  double total_length_m() const noexcept;

  friend bool operator==(const SegmentPath&, const SegmentPath&) = default;

 private:
  std::vector<PathElement> elements_;
};

/// Segment path covered by a sequence of route legs.
SegmentPath path_from_legs(const RoadNetwork& network, std::span<const RouteLeg> legs);

struct CommonSequence {
  double matched_m = 0.0;                ///< X
  std::vector<std::string> segment_ids;  ///< matched ids in order
};

/// Length-weighted longest common subsequence of the two id sequences; a
/// matched pair contributes the smaller of its two traversed lengths.
CommonSequence common_sequence(const SegmentPath& output, const SegmentPath& truth);

struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double matched_m = 0.0;    ///< X
  double unmatched_m = 0.0;  ///< Y
  double truth_m = 0.0;      ///< G
  bool empty_output = false;
};

/// precision = X/(X+Y), recall = X/G, F = harmonic mean. An empty output
/// scores zero and sets empty_output. Throws std::invalid_argument when the
/// truth length is zero.
Score score(const SegmentPath& output, const SegmentPath& truth);

/// SegmentPath JSON: {"trace_id": ..., "path": [{"segment_id": ..., "length_m": ...}, ...]}.
struct TracePath {
  std::string trace_id;
  SegmentPath path;
};
TracePath read_trace_path(std::istream& in);
void write_trace_path(std::ostream& out, const TracePath& path);

}  // namespace semmatch
