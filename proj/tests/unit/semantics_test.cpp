#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "semmatch/errors.hpp"
#include "semmatch/semantics.hpp"

namespace semmatch {
namespace {

using T = SemanticType;

TEST(SemanticType, WireNamesRoundTrip) {
  for (std::size_t i = 0; i < kDetectionTypeCount; ++i) {
    const auto t = static_cast<T>(i);
    EXPECT_EQ(parse_semantic_type(to_string(t)), t);
  }
  EXPECT_EQ(parse_semantic_type("Cat's eye"), T::CatsEye);
  EXPECT_EQ(parse_semantic_type("U-turn"), T::UTurn);
  EXPECT_EQ(parse_semantic_type("No Class"), T::NoClass);
  EXPECT_FALSE(parse_semantic_type("pothole").has_value());
  EXPECT_EQ(to_string(T::CatsEye), "cats_eye");
}

TEST(Classify, UTurnFromHalfCircle) {
  FeatureVector f;
  f.heading_change_deg = -178.0;
  f.gravity_variance = 1.0;
  f.duration_s = 8.0;
  EXPECT_EQ(classify(f), T::UTurn);
}

TEST(Classify, BumpFromShortGravitySpike) {
  FeatureVector f;
  f.gravity_variance = 4.0;
  f.duration_s = 0.6;
  EXPECT_EQ(classify(f), T::Bump);
  f.duration_s = 3.0;
  EXPECT_EQ(classify(f), T::CatsEye);
}

TEST(Classify, QuietFeaturesAreNoClass) {
  EXPECT_EQ(classify(FeatureVector{}), T::NoClass);
}

TEST(Classify, RemainingBranches) {
  FeatureVector turn;
  turn.heading_change_deg = 88.0;
  EXPECT_EQ(classify(turn), T::Turn);

  FeatureVector curve;
  curve.heading_change_deg = 35.0;
  curve.duration_s = 9.0;
  EXPECT_EQ(classify(curve), T::Curve);
  curve.duration_s = 2.0;
  EXPECT_EQ(classify(curve), T::NoClass);

  FeatureVector bridge;
  bridge.elevation_cue = 2.0;
  EXPECT_EQ(classify(bridge), T::Bridge);

  FeatureVector tunnel;
  tunnel.gps_visible = false;
  EXPECT_EQ(classify(tunnel), T::Tunnel);

  ClassifierThresholds th;
  th.turn_min_deg = 95.0;
  EXPECT_NE(classify(turn, th), T::Turn);
  EXPECT_EQ(classify(turn), classify(turn));
}

TEST(Confusion, RawCountRows) {
  const auto m = ConfusionMatrix::standard(0.0);
  EXPECT_EQ(m.detection_prob(T::Bump, T::Bump), 1.0);
  EXPECT_EQ(m.miss_prob(T::CatsEye), 5.0 / 27.0);
  EXPECT_EQ(m.detection_prob(T::Turn, T::Turn), 1.0);
  EXPECT_EQ(m.detection_prob(T::Bump, T::Tunnel), 0.0);
  EXPECT_EQ(m.miss_prob(T::Tunnel), 0.0);
  EXPECT_EQ(m.detection_prob(T::Bridge, T::Bridge), 11.0 / 14.0);
}

TEST(Confusion, SmoothedRows) {
  const auto half = ConfusionMatrix::standard(0.5);
  EXPECT_NEAR(half.detection_prob(T::Bridge, T::Bridge), 11.5 / 18.0, 1e-15);
  EXPECT_NEAR(half.detection_prob(T::Bridge, T::Bridge), 0.639, 5e-4);
  const auto tenth = ConfusionMatrix::standard(0.1);
  EXPECT_NEAR(tenth.detection_prob(T::Bump, T::Tunnel), 0.1 / 15.8, 1e-15);
  EXPECT_NEAR(tenth.detection_prob(T::Bump, T::Tunnel), 0.0063, 5e-5);
  EXPECT_EQ(ConfusionMatrix::standard().epsilon(), kDefaultConfusionSmoothing);
}

TEST(Confusion, RowsSumToOneAndMatchOracle) {
  for (double eps : {0.0, 0.1, 0.5, 2.0}) {
    const auto m = ConfusionMatrix::standard(eps);
    for (T truth : kLandmarkTypes) {
      double sum = 0.0;
      for (std::size_t d = 0; d < kDetectionTypeCount; ++d) {
        const double p = m.detection_prob(static_cast<T>(d), truth);
        EXPECT_NEAR(p, oracle::confusion_prob(default_confusion_counts(), eps, static_cast<T>(d), truth), 1e-15);
        if (eps > 0.0) EXPECT_GT(p, 0.0);
        sum += p;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Confusion, InvalidInputs) {
  const auto m = ConfusionMatrix::standard();
  EXPECT_THROW((void)m.detection_prob(T::Bump, T::NoClass), std::invalid_argument);
  EXPECT_THROW((void)m.miss_prob(T::NoClass), std::invalid_argument);
  ConfusionCounts zero_row = default_confusion_counts();
  zero_row[2] = {};
  EXPECT_THROW(ConfusionMatrix::from_counts(zero_row, 0.0), ValidationError);
  EXPECT_NO_THROW(ConfusionMatrix::from_counts(zero_row, 0.5));
  ConfusionCounts negative = default_confusion_counts();
  negative[0][1] = -1.0;
  EXPECT_THROW(ConfusionMatrix::from_counts(negative), ValidationError);
  EXPECT_THROW(ConfusionMatrix::standard(-0.1), ValidationError);
}

TEST(ConfusionCsv, RoundTrip) {
  ConfusionCounts c = default_confusion_counts();
  c[3][0] = 2.5;
  std::stringstream buf;
  write_confusion_csv(buf, c);
  EXPECT_EQ(read_confusion_csv(buf), c);
}

TEST(ConfusionCsv, DisplayHeadersAndShuffledRows) {
  std::istringstream in(
      "truth,Cat's eye,Bump,Curve,Bridge,Tunnel,Turn,U-turn,No Class\n"
      "U-turn,0,0,0,0,0,0,12,0\n"
      "Bump,0,37,0,0,0,0,0,0\n"
      "Cat's eye,22,0,0,0,0,0,0,5\n"
      "Curve,0,0,33,0,0,0,0,0\n"
      "Bridge,0,0,0,11,0,0,0,3\n"
      "Tunnel,0,0,0,0,15,0,0,0\n"
      "Turn,0,0,0,0,0,55,0,0\n");
  EXPECT_EQ(read_confusion_csv(in), default_confusion_counts());
}

TEST(ConfusionCsv, Malformed) {
  std::istringstream empty("");
  EXPECT_THROW(read_confusion_csv(empty), ParseError);
  std::istringstream missing("x,cats_eye,bump,curve,bridge,tunnel,turn,u_turn,no_class\nbump,0,1,0,0,0,0,0,0\n");
  EXPECT_THROW(read_confusion_csv(missing), ParseError);
  std::istringstream junk("x,cats_eye,bump,curve,bridge,tunnel,turn,u_turn,no_class\nbump,0,one,0,0,0,0,0,0\n");
  EXPECT_THROW(read_confusion_csv(junk), ParseError);
}

}  // namespace
}  // namespace semmatch
