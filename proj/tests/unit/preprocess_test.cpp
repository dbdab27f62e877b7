#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "semmatch/errors.hpp"
#include "semmatch/preprocess.hpp"

namespace semmatch {
namespace {

using testing::offset_m;

struct LowessRow {
  double t, y, clean, expected;
};

std::vector<LowessRow> read_lowess(const std::string& name) {
  std::ifstream in(testing::data_path(name));
  EXPECT_TRUE(in.good()) << name;
  std::vector<LowessRow> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    LowessRow r{};
    ss >> r.t >> r.y >> r.clean >> r.expected;
    rows.push_back(r);
  }
  return rows;
}

double rms(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

class LowessReference : public ::testing::TestWithParam<std::pair<const char*, int>> {};

TEST_P(LowessReference, GravityMatchesReferenceSmoother) {
  const auto [file, bw] = GetParam();
  const auto rows = read_lowess(file);
  ASSERT_EQ(rows.size(), 60u);
  std::vector<SensorSample> in;
  for (const auto& r : rows) in.push_back({r.t, r.y, 0.0});
  const auto out = smooth_sensors(in, bw);
  ASSERT_EQ(out.size(), in.size());
  std::vector<double> got, clean, raw;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(out[i].gravity_accel, rows[i].expected, 1e-12) << i;
    EXPECT_EQ(out[i].t, rows[i].t);
    got.push_back(out[i].gravity_accel);
    clean.push_back(rows[i].clean);
    raw.push_back(rows[i].y);
  }
  EXPECT_LT(rms(got, clean), rms(raw, clean));
}

TEST_P(LowessReference, HeadingIsSmoothedAcrossNorth) {
  const auto [file, bw] = GetParam();
  const auto rows = read_lowess(file);
  std::vector<SensorSample> in;
  for (const auto& r : rows) in.push_back({r.t, 9.81, wrap_unsigned_deg(355.0 + 10.0 * r.y)});
  const auto out = smooth_sensors(in, bw);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expect = wrap_unsigned_deg(355.0 + 10.0 * rows[i].expected);
    EXPECT_NEAR(wrap_signed_deg(out[i].heading_deg - expect), 0.0, 1e-9) << i;
    EXPECT_GE(out[i].heading_deg, 0.0);
    EXPECT_LT(out[i].heading_deg, 360.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Bandwidths, LowessReference,
                         ::testing::Values(std::pair{"lowess_sinusoid_bw5.csv", 5},
                                           std::pair{"lowess_sinusoid_bw9.csv", 9}),
                         [](const auto& info) { return "bw" + std::to_string(info.param.second); });

TEST(SmoothSensors, ConstantAndLinearStreamsAreReproduced) {
  std::vector<SensorSample> constant, line;
  for (int i = 0; i < 30; ++i) {
    const double t = 0.5 * i + (i % 3) * 0.1;
    constant.push_back({t, 9.81, 42.0});
    line.push_back({t, 2.0 * t, std::fmod(2.0 * t, 360.0)});
  }
  const auto c = smooth_sensors(constant, 5);
  const auto l = smooth_sensors(line, 7);
  for (std::size_t i = 0; i < constant.size(); ++i) {
    EXPECT_NEAR(c[i].gravity_accel, 9.81, 1e-12);
    EXPECT_NEAR(c[i].heading_deg, 42.0, 1e-12);
    EXPECT_NEAR(l[i].gravity_accel, line[i].gravity_accel, 1e-9);
    EXPECT_NEAR(l[i].heading_deg, line[i].heading_deg, 1e-9);
  }
}

TEST(SmoothSensors, ShortStreamUnchangedAndBadBandwidthRejected) {
  const std::vector<SensorSample> s{{0.0, 1.0, 10.0}, {1.0, 5.0, 20.0}};
  const auto out = smooth_sensors(s, 5);
  EXPECT_EQ(out[1].gravity_accel, 5.0);
  EXPECT_THROW(smooth_sensors(s, 4), ConfigError);
  EXPECT_THROW(smooth_sensors(s, 1), ConfigError);
}

CleanFix clean_at(double t, const GeoPoint& p) { return {t, p, 10.0, {}}; }

TEST(EstimateSpeed, Examples) {
  const GeoPoint o{10.0, 10.0};
  const std::vector<CleanFix> still{clean_at(0.0, o)};
  EXPECT_EQ(estimate_speed(still, {10.0, o, 10.0}), 0.0);

  const std::vector<CleanFix> one{clean_at(0.0, o)};
  const GeoPoint km = offset_m(o, 1000.0, 0.0);
  EXPECT_NEAR(estimate_speed(one, {100.0, km, 10.0}), geodesic_distance(o, km) / 100.0, 1e-12);
  EXPECT_NEAR(estimate_speed(one, {100.0, km, 10.0}), 10.0, 1e-3);

  // three pairwise speeds: 400/30, 300/20, 150/10
  std::vector<CleanFix> three{clean_at(0.0, o), clean_at(10.0, offset_m(o, 100, 0)), clean_at(20.0, offset_m(o, 250, 0))};
  const RawFix cand{30.0, offset_m(o, 400, 0), 10.0};
  EXPECT_NEAR(estimate_speed(three, cand), (400.0 / 30.0 + 15.0 + 15.0) / 3.0, 1e-4);
  const double forward = estimate_speed(three, cand);
  std::reverse(three.begin(), three.end());
  EXPECT_NEAR(estimate_speed(three, cand), forward, 1e-12);

  // fixes after the candidate count by absolute time difference
  const std::vector<CleanFix> later{clean_at(50.0, km)};
  EXPECT_NEAR(estimate_speed(later, {0.0, o, 10.0}), geodesic_distance(o, km) / 50.0, 1e-12);

  EXPECT_THROW(estimate_speed({}, cand), ValidationError);
  EXPECT_THROW(estimate_speed(one, {0.0, km, 10.0}), ValidationError);
}

std::vector<RawFix> drive_east(const GeoPoint& o, int n, double speed, double dt) {
  std::vector<RawFix> out;
  for (int i = 0; i < n; ++i) out.push_back({i * dt, offset_m(o, speed * dt * i, 0.0), 10.0});
  return out;
}

TEST(SpeedFilter, ConsistentDriveIsKept) {
  const auto raw = drive_east({5.0, 5.0}, 20, 15.0, 10.0);
  FilterConfig cfg;
  const auto out = speed_filter(raw, cfg, [](const GeoPoint&) { return std::optional<double>(25.0); });
  ASSERT_EQ(out.size(), raw.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_FALSE(out[i].flags.speed_rejected);
    EXPECT_EQ(out[i].loc, raw[i].loc);
  }
}

TEST(SpeedFilter, TeleportIsRejectedAndKeepsPreviousLocation) {
  auto raw = drive_east({5.0, 5.0}, 10, 15.0, 10.0);
  raw[6].loc = offset_m(raw[5].loc, 0.0, 50000.0);
  const auto out = speed_filter(raw, FilterConfig{});
  EXPECT_TRUE(out[6].flags.speed_rejected);
  EXPECT_EQ(out[6].loc, out[5].loc);
  EXPECT_EQ(out[6].t, raw[6].t);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i != 6) EXPECT_FALSE(out[i].flags.speed_rejected) << i;
  }
}

TEST(SpeedFilter, MapLimitTightensTheThreshold) {
  const auto raw = drive_east({5.0, 5.0}, 10, 20.0, 10.0);
  const auto open = speed_filter(raw, FilterConfig{});
  const auto limited = speed_filter(raw, FilterConfig{}, [](const GeoPoint&) { return std::optional<double>(10.0); });
  EXPECT_FALSE(open[3].flags.speed_rejected);
  EXPECT_TRUE(limited[1].flags.speed_rejected);
  EXPECT_TRUE(speed_filter({}, FilterConfig{}).empty());
}

TEST(FilterConfig, Validation) {
  FilterConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [](auto mutate) {
    FilterConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](FilterConfig& c) { c.speed_window = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](FilterConfig& c) { c.trim_alpha = 0.6; }).validate(), ConfigError);
  EXPECT_THROW(bad([](FilterConfig& c) { c.bounce_window = 4; }).validate(), ConfigError);
  EXPECT_THROW(bad([](FilterConfig& c) { c.max_speed_mps = 0.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](FilterConfig& c) { c.turn_threshold_deg = -1.0; }).validate(), ConfigError);
}

TEST(SpatialSortKey, CollinearEastWestFollowsLongitude) {
  const GeoPoint o{20.0, 20.0};
  std::vector<GeoPoint> pts{offset_m(o, 300, 0), offset_m(o, 0, 0), offset_m(o, 900, 0), offset_m(o, 450, 0)};
  const auto keys = spatial_sort_key(pts, GeoBox::around(pts));
  EXPECT_LT(keys[1], keys[0]);
  EXPECT_LT(keys[0], keys[3]);
  EXPECT_LT(keys[3], keys[2]);
  EXPECT_EQ(keys[2], 63u);
}

TEST(SpatialSortKey, SameCellGivesEqualKeys) {
  const GeoPoint o{20.0, 20.0};
  std::vector<GeoPoint> pts{o, offset_m(o, 0.5, 0.5), offset_m(o, 1000, 1000)};
  const auto keys = spatial_sort_key(pts, GeoBox::around(pts));
  EXPECT_EQ(keys[0], keys[1]);
  EXPECT_EQ(keys[2], 63u * 64u + 63u);
}

TEST(SpatialSortKey, RandomCloudMatchesIndependentIndex) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-2000.0, 2000.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(offset_m({-33.0, 151.0}, d(rng), d(rng)));
    const auto keys = spatial_sort_key(pts, GeoBox::around(pts));
    const auto expect = oracle::grid_keys(pts);
    ASSERT_EQ(keys.size(), expect.size());
    for (std::size_t i = 0; i < keys.size(); ++i) EXPECT_EQ(keys[i], expect[i]);
  }
}

std::vector<CleanFix> jittered_stream(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> jitter(0.0, 150.0);
  std::vector<CleanFix> s;
  const GeoPoint o{48.0, 2.0};
  for (int i = 0; i < n; ++i) s.push_back(clean_at(i, offset_m(o, 40.0 * i + jitter(rng), jitter(rng))));
  return s;
}

TEST(TrimmedMean, AlphaZeroIsTheWindowMean) {
  std::mt19937_64 rng(41);
  for (int w : {3, 5, 7}) {
    const auto s = jittered_stream(rng, 25);
    const auto out = trimmed_mean_filter(s, 0.0, w);
    const auto expect = oracle::trimmed_means(s, 0.0, w);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(out[i].loc, expect[i]) << w << " " << i;
  }
}

TEST(TrimmedMean, AlphaHalfIsTheWindowMedian) {
  std::mt19937_64 rng(42);
  for (int w : {3, 5, 9}) {
    const auto s = jittered_stream(rng, 25);
    const auto out = trimmed_mean_filter(s, 0.5, w);
    const auto expect = oracle::trimmed_means(s, 0.5, w);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(out[i].loc, expect[i]);
      // the median is one of the window's own points
      const auto hit = std::find_if(s.begin(), s.end(), [&](const CleanFix& f) { return f.loc == out[i].loc; });
      EXPECT_NE(hit, s.end());
    }
  }
}

TEST(TrimmedMean, PingPongOutlierIsExcluded) {
  const GeoPoint o{48.0, 2.0};
  std::vector<CleanFix> s;
  for (int i = 0; i < 5; ++i) s.push_back(clean_at(i, offset_m(o, 100.0 * i, 0.0)));
  s[2].loc = offset_m(s[2].loc, 0.0, 2000.0);
  const auto out = trimmed_mean_filter(s, 0.2, 5);
  // one dropped at each end of the key order: the westernmost fix and the outlier
  const GeoPoint expect{(s[1].loc.lat + s[3].loc.lat + s[4].loc.lat) / 3.0,
                        (s[1].loc.lon + s[3].loc.lon + s[4].loc.lon) / 3.0};
  EXPECT_EQ(out[2].loc, expect);
  EXPECT_NEAR(out[2].loc.lat, o.lat, 1e-12);
  EXPECT_TRUE(out[2].flags.bounce_smoothed);
}

TEST(TrimmedMean, ShortStreamIsUnchanged) {
  const std::vector<CleanFix> s{clean_at(0, {1, 1}), clean_at(1, {1, 2})};
  const auto out = trimmed_mean_filter(s, 0.2, 5);
  EXPECT_EQ(out[1].loc, s[1].loc);
  EXPECT_FALSE(out[1].flags.bounce_smoothed);
  EXPECT_THROW(trimmed_mean_filter(s, 0.7, 5), ConfigError);
}

std::vector<SensorSample> heading_ramp(double t0, double t1, double h0, double h1) {
  std::vector<SensorSample> s;
  for (double t = t0; t <= t1 + 1e-9; t += 1.0) {
    const double f = (t - t0) / (t1 - t0);
    s.push_back({t, 9.81, wrap_unsigned_deg(h0 + f * (h1 - h0))});
  }
  return s;
}

std::vector<CleanFix> to_clean(const std::vector<RawFix>& raw) {
  std::vector<CleanFix> out;
  for (const auto& r : raw) out.push_back(clean_at(r.t, r.loc));
  return out;
}

TEST(DirectionFilter, StraightDriveIsKept) {
  const auto fixes = to_clean(drive_east({0.0, 0.0}, 10, 10.0, 10.0));
  const auto sensors = heading_ramp(0.0, 100.0, 90.0, 90.0);
  const auto out = direction_filter(fixes, sensors, FilterConfig{});
  for (const auto& f : out) EXPECT_FALSE(f.flags.direction_rejected);
}

TEST(DirectionFilter, PingPongWithSteadySensorsIsRejected) {
  auto fixes = to_clean(drive_east({0.0, 0.0}, 10, 10.0, 10.0));
  fixes[5].loc = offset_m(fixes[3].loc, 0.0, 20.0);  // ~170 degree jump back
  const auto sensors = heading_ramp(0.0, 100.0, 90.0, 93.0);
  const auto out = direction_filter(fixes, sensors, FilterConfig{});
  EXPECT_TRUE(out[5].flags.direction_rejected);
  EXPECT_EQ(out[5].loc, out[4].loc);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i != 5) EXPECT_FALSE(out[i].flags.direction_rejected) << i;
  }
  EXPECT_EQ(out.size(), fixes.size());
}

TEST(DirectionFilter, RealTurnPasses) {
  const GeoPoint o{0.0, 0.0};
  std::vector<CleanFix> fixes;
  for (int i = 0; i <= 5; ++i) fixes.push_back(clean_at(10.0 * i, offset_m(o, 100.0 * i, 0.0)));
  for (int i = 1; i <= 5; ++i) fixes.push_back(clean_at(50.0 + 10.0 * i, offset_m(o, 500.0, 100.0 * i)));
  auto sensors = heading_ramp(0.0, 48.0, 90.0, 90.0);
  const auto turn = heading_ramp(49.0, 52.0, 90.0, 0.0);
  const auto after = heading_ramp(53.0, 110.0, 0.0, 0.0);
  sensors.insert(sensors.end(), turn.begin(), turn.end());
  sensors.insert(sensors.end(), after.begin(), after.end());
  const auto out = direction_filter(fixes, sensors, FilterConfig{});
  for (const auto& f : out) {
    EXPECT_FALSE(f.flags.direction_rejected);
    EXPECT_FALSE(f.flags.sensor_gap);
  }
}

TEST(DirectionFilter, MissingSensorCoverageFailsOpen) {
  auto fixes = to_clean(drive_east({0.0, 0.0}, 10, 10.0, 10.0));
  fixes[5].loc = offset_m(fixes[3].loc, 0.0, 20.0);
  const auto sensors = heading_ramp(0.0, 20.0, 90.0, 90.0);
  const auto out = direction_filter(fixes, sensors, FilterConfig{});
  EXPECT_FALSE(out[5].flags.direction_rejected);
  EXPECT_TRUE(out[5].flags.sensor_gap);
  EXPECT_EQ(out[5].loc, fixes[5].loc);
}

TEST(SensorHeadingChange, UnwrapsAcrossNorthAndReportsGaps) {
  const auto s = heading_ramp(0.0, 10.0, 350.0, 370.0);
  const auto change = sensor_heading_change(s, 0.0, 10.0, 5.0);
  ASSERT_TRUE(change.has_value());
  EXPECT_NEAR(*change, 20.0, 1e-9);
  EXPECT_FALSE(sensor_heading_change(s, 0.0, 30.0, 5.0).has_value());
  std::vector<SensorSample> holey{{0.0, 9.8, 0.0}, {10.0, 9.8, 5.0}};
  EXPECT_FALSE(sensor_heading_change(holey, 0.0, 10.0, 5.0).has_value());
}

TEST(PreprocessFixes, KeepsOneOutputPerInput) {
  auto raw = drive_east({0.0, 0.0}, 30, 12.0, 5.0);
  raw[10].loc = offset_m(raw[10].loc, 40000.0, 0.0);
  raw[20].loc = raw[18].loc;
  const auto sensors = heading_ramp(0.0, 150.0, 90.0, 90.0);
  const auto out = preprocess_fixes(raw, sensors, FilterConfig{});
  ASSERT_EQ(out.size(), raw.size());
  EXPECT_TRUE(out[10].flags.speed_rejected);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].t, raw[i].t);
}

}  // namespace
}  // namespace semmatch
