#include "semmatch/path_finder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>

namespace semmatch {
namespace {

constexpr SegmentIndex kNoSegment = std::numeric_limits<SegmentIndex>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

PathFinder::PathFinder(const RoadNetwork& network, std::size_t max_cached_trees)
    : network_(&network), max_cached_trees_(std::max<std::size_t>(max_cached_trees, 1)) {}

const PathFinder::Tree& PathFinder::tree_from(NodeIndex source, double budget_m) {
  if (auto it = trees_.find(source); it != trees_.end() && it->second.budget >= budget_m) {
    return it->second;
  }
  if (trees_.size() >= max_cached_trees_) {
    trees_.clear();
  }
  const RoadNetwork& net = *network_;
  Tree tree;
  tree.budget = budget_m;
  tree.dist.assign(net.node_count(), kInf);
  tree.via.assign(net.node_count(), kNoSegment);

  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  tree.dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, n] = queue.top();
    queue.pop();
    if (d > tree.dist[n]) {
      continue;
    }
    for (SegmentIndex s : net.incident(n)) {
      const NodeIndex a = net.start_node(s);
      const NodeIndex b = net.end_node(s);
      if (a == b) {
        continue;
      }
      const NodeIndex other = a == n ? b : a;
      const double nd = d + net.segment_length(s);
      if (nd > budget_m) {
        continue;
      }
      if (nd < tree.dist[other] || (nd == tree.dist[other] && s < tree.via[other])) {
        const bool improved = nd < tree.dist[other];
        tree.dist[other] = nd;
        tree.via[other] = s;
        if (improved) {
          queue.emplace(nd, other);
        }
      }
    }
  }
  return trees_.insert_or_assign(source, std::move(tree)).first->second;
}

PathFinder::Join PathFinder::best_join(const NetworkPosition& from, const NetworkPosition& to, double budget_m) {
  const RoadNetwork& net = *network_;
  const double from_len = net.segment_length(from.segment);
  const double to_len = net.segment_length(to.segment);
  const std::array<std::pair<NodeIndex, double>, 2> exits = {
      std::pair{net.start_node(from.segment), 0.0}, std::pair{net.end_node(from.segment), from_len}};
  const std::array<std::pair<NodeIndex, double>, 2> entries = {
      std::pair{net.start_node(to.segment), 0.0}, std::pair{net.end_node(to.segment), to_len}};

  Join best;
  for (const auto& [exit_node, exit_offset] : exits) {
    const double out_cost = std::abs(from.offset_m - exit_offset);
    if (out_cost > budget_m) {
      continue;
    }
    const Tree& tree = tree_from(exit_node, budget_m);
    for (const auto& [entry_node, entry_offset] : entries) {
      const double total = out_cost + tree.dist[entry_node] + std::abs(to.offset_m - entry_offset);
      if (total <= budget_m && total < best.length) {
        best = {total, exit_node, entry_node, exit_offset, entry_offset};
      }
    }
  }
  return best;
}

std::optional<Route> PathFinder::route(const NetworkPosition& from, const NetworkPosition& to, double budget_m) {
  if (from.segment == to.segment) {
    Route r;
    r.legs.push_back({from.segment, from.offset_m, to.offset_m});
    r.length_m = r.legs.front().length_m();
    return r;
  }
  const Join join = best_join(from, to, budget_m);
  if (!std::isfinite(join.length)) {
    return std::nullopt;
  }
  const RoadNetwork& net = *network_;
  const Tree& tree = tree_from(join.exit_node, budget_m);

  Route r;
  r.length_m = join.length;
  r.legs.push_back({from.segment, from.offset_m, join.exit_offset});
  std::vector<RouteLeg> middle;
  for (NodeIndex n = join.entry_node; n != join.exit_node;) {
    const SegmentIndex s = tree.via[n];
    const bool reached_at_end = net.end_node(s) == n;
    const double len = net.segment_length(s);
    middle.push_back(reached_at_end ? RouteLeg{s, 0.0, len} : RouteLeg{s, len, 0.0});
    n = reached_at_end ? net.start_node(s) : net.end_node(s);
  }
  r.legs.insert(r.legs.end(), middle.rbegin(), middle.rend());
  r.legs.push_back({to.segment, join.entry_offset, to.offset_m});
  return r;
}

std::optional<Route> PathFinder::route(StateId from, StateId to, double budget_m) {
  const HiddenState& a = network_->state(from);
  const HiddenState& b = network_->state(to);
  return route(NetworkPosition{a.segment, a.offset_m}, NetworkPosition{b.segment, b.offset_m}, budget_m);
}

std::optional<double> PathFinder::distance(StateId from, StateId to, double budget_m) {
  const HiddenState& a = network_->state(from);
  const HiddenState& b = network_->state(to);
  if (a.segment == b.segment) {
    return std::abs(a.offset_m - b.offset_m);
  }
  const Join join = best_join({a.segment, a.offset_m}, {b.segment, b.offset_m}, budget_m);
  if (!std::isfinite(join.length)) {
    return std::nullopt;
  }
  return join.length;
}

std::vector<StateId> PathFinder::skipped_states(const Route& r, StateId from, StateId to) const {
  std::vector<StateId> out;
  for (const RouteLeg& leg : r.legs) {
    const auto on_segment = network_->states_on(leg.segment);
    const double lo = std::min(leg.from_offset_m, leg.to_offset_m);
    const double hi = std::max(leg.from_offset_m, leg.to_offset_m);
    auto visit = [&](const HiddenState& s) {
      if (s.offset_m >= lo && s.offset_m <= hi && s.id != from && s.id != to) {
        out.push_back(s.id);
      }
    };
    if (leg.forward()) {
      std::for_each(on_segment.begin(), on_segment.end(), visit);
    } else {
      std::for_each(on_segment.rbegin(), on_segment.rend(), visit);
    }
  }
  return out;
}

}  // namespace semmatch
