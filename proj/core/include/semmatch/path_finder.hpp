#pragma once

#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "semmatch/road_network.hpp"

namespace semmatch {

/// A position on the network: arc length along one segment.
struct NetworkPosition {
  SegmentIndex segment = 0;
  double offset_m = 0.0;
};

/// Budgeted shortest paths over the undirected segment graph. Keeps a cache of
/// single-source node trees so that the many state pairs of one matcher step
/// share Dijkstra runs. Not thread-safe; use one instance per worker.
class PathFinder {
 public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  explicit PathFinder(const RoadNetwork& network, std::size_t max_cached_trees = 4096);

  /// Minimal arc-length route between two positions, or nullopt when its
  /// length exceeds budget_m. Positions on the same segment are joined along
  /// that segment regardless of budget.
  std::optional<Route> route(const NetworkPosition& from, const NetworkPosition& to,
                             double budget_m = kUnbounded);
  std::optional<Route> route(StateId from, StateId to, double budget_m = kUnbounded);

  /// Length of route(from, to, budget) without building the legs.
  std::optional<double> distance(StateId from, StateId to, double budget_m = kUnbounded);

  /// States passed strictly between `from` and `to` along `r`, in traversal order.
  std::vector<StateId> skipped_states(const Route& r, StateId from, StateId to) const;

  void clear() { trees_.clear(); }

  const RoadNetwork& network() const noexcept { return *network_; }

 private:
  struct Tree {
    double budget = 0.0;
    std::vector<double> dist;
    std::vector<SegmentIndex> via;  // segment used to reach each node
  };

  struct Join {
    double length = std::numeric_limits<double>::infinity();
    NodeIndex exit_node = 0;
    NodeIndex entry_node = 0;
    double exit_offset = 0.0;
    double entry_offset = 0.0;
  };

  const Tree& tree_from(NodeIndex source, double budget_m);
  Join best_join(const NetworkPosition& from, const NetworkPosition& to, double budget_m);

  const RoadNetwork* network_;
  std::size_t max_cached_trees_;
  std::unordered_map<NodeIndex, Tree> trees_;
};

}  // namespace semmatch
