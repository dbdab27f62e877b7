#pragma once

#include <array>
#include <iosfwd>

#include "semmatch/geo.hpp"
#include "semmatch/semantic_type.hpp"

namespace semmatch {

/// Summary features of one candidate sensor event.
struct FeatureVector {
  double gravity_variance = 0.0;    ///< (m/s^2)^2 over the event window
  double heading_change_deg = 0.0;  ///< signed, integrated over the event window
  double duration_s = 1.0;
  double elevation_cue = 0.0;       ///< > 0 for an up-then-down profile
  bool gps_visible = true;
};

/// Decision-tree thresholds. Heading ranges apply to |heading_change_deg|.
struct ClassifierThresholds {
  double uturn_min_deg = 150.0;
  double uturn_max_deg = 210.0;
  double turn_min_deg = 60.0;
  double turn_max_deg = 120.0;
  double curve_min_deg = 20.0;
  double curve_min_duration_s = 5.0;
  double bridge_elevation_min = 1.0;
  double bump_variance_min = 2.0;
  double bump_max_duration_s = 1.5;
  double catseye_variance_min = 0.5;
};

/// Deterministic decision tree; NoClass when no branch fires.
SemanticType classify(const FeatureVector& f, const ClassifierThresholds& th = {});

/// Raw detection counts: rows = true landmark type (7), columns = detected
/// type including NoClass (8).
using ConfusionCounts = std::array<std::array<double, kDetectionTypeCount>, kLandmarkTypeCount>;

/// Counts from in-vehicle classification traces.
const ConfusionCounts& default_confusion_counts() noexcept;

inline constexpr double kDefaultConfusionSmoothing = 0.5;

/// Row-stochastic p(detected | true). Immutable once built.
class ConfusionMatrix {
 public:
  /// Row-normalises counts + epsilon. Throws ValidationError on negative
  /// counts, a negative epsilon, or a row with zero total mass.
  static ConfusionMatrix from_counts(const ConfusionCounts& counts, double epsilon = kDefaultConfusionSmoothing);

  /// Default counts smoothed with epsilon.
  static ConfusionMatrix standard(double epsilon = kDefaultConfusionSmoothing);

  /// p(detected | true_type). Throws std::invalid_argument when true_type is NoClass.
  double detection_prob(SemanticType detected, SemanticType true_type) const;

  /// p(NoClass | true_type).
  double miss_prob(SemanticType true_type) const;

  const ConfusionCounts& probabilities() const noexcept { return probs_; }
  const ConfusionCounts& counts() const noexcept { return counts_; }
  double epsilon() const noexcept { return epsilon_; }

 private:
  ConfusionCounts counts_{};
  ConfusionCounts probs_{};
  double epsilon_ = 0.0;
};

/// CSV with a header row of 8 detected-type names and one row per true type
/// whose first cell names it. Row order may vary; all 7 rows are required.
ConfusionCounts read_confusion_csv(std::istream& in);
void write_confusion_csv(std::ostream& out, const ConfusionCounts& counts);

/// A detected semantic event: the HMM observation.
struct SemanticEvent {
  double t = 0.0;
  GeoPoint loc;
  double err_m = 1.0;
  double heading_deg = 0.0;
  SemanticType type = SemanticType::NoClass;
};

}  // namespace semmatch
