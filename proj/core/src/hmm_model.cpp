#include "semmatch/hmm_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "semmatch/errors.hpp"
#include "semmatch/log_math.hpp"

namespace semmatch {
namespace {

// log(1 / sqrt(2 pi))
const double kLogInvSqrt2Pi = -0.5 * std::log(2.0 * std::numbers::pi);

double gaussian_log(double x, double sigma) { return kLogInvSqrt2Pi - std::log(sigma) - 0.5 * (x / sigma) * (x / sigma); }

}  // namespace

void HmmConfig::validate() const {
  if (!(sigma_h_deg >= kSigmaHFloorDeg) || !std::isfinite(sigma_h_deg)) {
    throw ConfigError("sigma_h must be finite and >= 1 degree");
  }
  if (window < 2) {
    throw ConfigError("window must be >= 2 steps");
  }
  if (!(err_scale > 0.0) || !std::isfinite(err_scale)) {
    throw ConfigError("err_scale must be > 0");
  }
  if (min_candidates < 1) {
    throw ConfigError("min_candidates must be >= 1");
  }
  if (!(max_speed_mps > 0.0)) {
    throw ConfigError("max_speed must be > 0");
  }
}

double location_log_prob(const GeoPoint& observed, double sigma_m, const GeoPoint& landmark) {
  return gaussian_log(geodesic_distance(observed, landmark), sigma_m);
}

double observation_log_prob(const SemanticEvent& z, const HiddenState& s, const ConfusionMatrix& m) {
  return std::log(m.detection_prob(z.type, s.type)) + location_log_prob(z.loc, z.err_m, s.loc);
}

double heading_log_prob(double residual_deg, double sigma_h_deg) { return gaussian_log(residual_deg, sigma_h_deg); }

double state_heading_change(const HiddenState& from, const HiddenState& to, double observed_change_deg) {
  const double direct = wrap_signed_deg(to.bearing_deg - from.bearing_deg);
  const double flipped = wrap_signed_deg(direct + 180.0);
  const double r_direct = std::abs(wrap_signed_deg(observed_change_deg - direct));
  const double r_flipped = std::abs(wrap_signed_deg(observed_change_deg - flipped));
  return r_flipped < r_direct ? flipped : direct;
}

double transition_log_prob(PathFinder& paths, StateId from, StateId to, double observed_change_deg,
                           const ConfusionMatrix& m, double sigma_h_deg, double budget_m) {
  const auto r = paths.route(from, to, budget_m);
  if (!r) {
    return kLogZero;
  }
  const RoadNetwork& net = paths.network();
  const HiddenState& a = net.state(from);
  const HiddenState& b = net.state(to);
  const double residual = wrap_signed_deg(observed_change_deg - state_heading_change(a, b, observed_change_deg));
  double lp = heading_log_prob(std::abs(residual), sigma_h_deg);
  for (StateId skipped : paths.skipped_states(*r, from, to)) {
    lp += std::log(m.miss_prob(net.state(skipped).type));
  }
  return lp;
}

double estimate_sigma_h(std::span<const HeadingPair> pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("sigma_h estimate needs at least one heading pair");
  }
  std::vector<double> residuals;
  residuals.reserve(pairs.size());
  for (const auto& p : pairs) {
    residuals.push_back(std::abs(wrap_signed_deg(p.observed_change_deg - p.map_change_deg)));
  }
  const std::size_t mid = residuals.size() / 2;
  std::nth_element(residuals.begin(), residuals.begin() + static_cast<std::ptrdiff_t>(mid), residuals.end());
  double median = residuals[mid];
  if (residuals.size() % 2 == 0) {
    const double lower = *std::max_element(residuals.begin(), residuals.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  return kMadConsistency * median;
}

bool normalize_log(std::vector<double>& log_weights) {
  const double total = log_sum_exp(log_weights);
  if (total == kLogZero || !std::isfinite(total)) {
    return false;
  }
  for (double& w : log_weights) {
    w -= total;
  }
  return true;
}

std::vector<double> initial_log_priors(const RoadNetwork& network, std::span<const StateId> candidates,
                                       SemanticType detected, const ConfusionMatrix& m) {
  std::vector<double> priors;
  priors.reserve(candidates.size());
  for (StateId id : candidates) {
    priors.push_back(std::log(m.detection_prob(detected, network.state(id).type)));
  }
  if (!normalize_log(priors)) {
    std::fill(priors.begin(), priors.end(), -std::log(static_cast<double>(priors.size())));
  }
  return priors;
}

PriorUpdate update_log_priors(std::span<const double> prev_log_priors, const LogMatrix& log_trans) {
  if (log_trans.rows != prev_log_priors.size()) {
    throw std::invalid_argument("transition rows must match the previous prior count");
  }
  PriorUpdate out;
  out.log_priors.assign(log_trans.cols, kLogZero);
  std::vector<double> terms(log_trans.rows);
  for (std::size_t i = 0; i < log_trans.cols; ++i) {
    for (std::size_t j = 0; j < log_trans.rows; ++j) {
      terms[j] = prev_log_priors[j] + log_trans(j, i);
    }
    out.log_priors[i] = log_sum_exp(terms);
  }
  if (!normalize_log(out.log_priors)) {
    out.uniform_fallback = true;
    std::fill(out.log_priors.begin(), out.log_priors.end(), -std::log(static_cast<double>(log_trans.cols)));
  }
  return out;
}

}  // namespace semmatch
