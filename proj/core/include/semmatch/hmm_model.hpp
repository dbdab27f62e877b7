#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "semmatch/path_finder.hpp"
#include "semmatch/road_network.hpp"
#include "semmatch/semantics.hpp"

namespace semmatch {

enum class HmmModel {
  Semantic,      ///< type-aware emission, heading + skipped-landmark transitions
  LocationOnly,  ///< distance-only emission, uniform transitions and priors
};

inline constexpr double kSigmaHFloorDeg = 1.0;
inline constexpr double kMadConsistency = 1.4826;

struct HmmConfig {
  double sigma_h_deg = 10.0;   ///< heading-change noise scale
  int window = 10;             ///< trellis steps kept before committing
  double err_scale = 1.5;      ///< candidate radius = err_scale * z.err_m
  int min_candidates = 1;      ///< fewer in-radius states raise NoCandidates
  double max_speed_mps = 50.0; ///< travel budget = max_speed * dt
  HmmModel model = HmmModel::Semantic;

  /// Throws ConfigError; sigma_h below kSigmaHFloorDeg is rejected.
  void validate() const;
};

/// Dense row-major matrix of log values: rows = previous step, cols = current.
struct LogMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  LogMatrix() = default;
  LogMatrix(std::size_t r, std::size_t c, double fill) : rows(r), cols(c), values(r * c, fill) {}

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// log N(distance; 0, sigma) in one dimension.
double location_log_prob(const GeoPoint& observed, double sigma_m, const GeoPoint& landmark);

/// log p(z | s) = log p(z.type | s.type) + log N(dist(z.loc, s.loc); 0, z.err_m).
double observation_log_prob(const SemanticEvent& z, const HiddenState& s, const ConfusionMatrix& m);

/// log N(residual; 0, sigma_h) with the residual in degrees.
double heading_log_prob(double residual_deg, double sigma_h_deg);

/// Map heading change between two states that best explains the observed
/// change: the wrapped bearing difference or its 180-degree flip, whichever
/// leaves the smaller residual (segments are undirected).
double state_heading_change(const HiddenState& from, const HiddenState& to, double observed_change_deg);

/// log p(to | from): heading term plus the log miss probability of every
/// landmark skipped on the minimal route. kLogZero when `to` is not reachable
/// within budget_m.
double transition_log_prob(PathFinder& paths, StateId from, StateId to, double observed_change_deg,
                           const ConfusionMatrix& m, double sigma_h_deg, double budget_m = PathFinder::kUnbounded);

struct HeadingPair {
  double observed_change_deg = 0.0;
  double map_change_deg = 0.0;
};

/// 1.4826 * median(|observed - map|) with wrapped residuals. Throws
/// std::invalid_argument on empty input. No floor is applied.
double estimate_sigma_h(std::span<const HeadingPair> pairs);

/// Normalised log priors from the detection probabilities of the first
/// observation's type given each candidate's landmark type.
std::vector<double> initial_log_priors(const RoadNetwork& network, std::span<const StateId> candidates,
                                       SemanticType detected, const ConfusionMatrix& m);

struct PriorUpdate {
  std::vector<double> log_priors;
  bool uniform_fallback = false;  ///< propagated mass was zero everywhere
};

/// pi_i = sum_j pi_j * p(s_i | s_j), normalised; uniform when the mass vanishes.
PriorUpdate update_log_priors(std::span<const double> prev_log_priors, const LogMatrix& log_trans);

/// Normalises log weights in place so that they sum to one; returns false
/// (and leaves the input untouched) when all weights are zero.
bool normalize_log(std::vector<double>& log_weights);

}  // namespace semmatch
