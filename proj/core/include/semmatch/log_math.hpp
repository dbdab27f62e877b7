#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace semmatch {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(sum(exp(v))); kLogZero for an empty span or all-zero mass.
inline double log_sum_exp(std::span<const double> v) noexcept {
  if (v.empty()) {
    return kLogZero;
  }
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == kLogZero || !std::isfinite(hi)) {
    return hi;
  }
  double sum = 0.0;
  for (double x : v) {
    sum += std::exp(x - hi);
  }
  return hi + std::log(sum);
}

}  // namespace semmatch
