#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

namespace semmatch::testing {

GeoPoint offset_m(const GeoPoint& origin, double east_m, double north_m) {
  const double deg = 180.0 / (std::numbers::pi * kEarthRadiusM);
  return {origin.lat + north_m * deg, origin.lon + east_m * deg / std::cos(origin.lat * std::numbers::pi / 180.0)};
}

RoadSegment straight(std::string id, const GeoPoint& a, const GeoPoint& b,
                     std::vector<std::pair<SemanticType, double>> landmarks, std::optional<double> speed_limit_mps) {
  RoadSegment s;
  s.id = std::move(id);
  s.polyline = {a, b};
  s.speed_limit_mps = speed_limit_mps;
  const double len = geodesic_distance(a, b);
  for (const auto& [type, at] : landmarks) {
    s.landmarks.push_back({type, lerp(a, b, at / len), 0.0});
  }
  return s;
}

RoadNetwork single_segment(std::vector<std::pair<SemanticType, double>> landmarks) {
  const GeoPoint a{0.0, 0.0};
  std::vector<RoadSegment> segs;
  segs.push_back(straight("s", a, offset_m(a, 1000.0, 0.0), std::move(landmarks)));
  return RoadNetwork(std::move(segs));
}

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(SEMMATCH_TEST_DATA_DIR) / name;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("semmatch-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace semmatch::testing
