#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semmatch/road_network.hpp"

namespace semmatch::testing {

/// Point displaced from `origin` by metres east and north (flat-earth, fine below ~10 km).
GeoPoint offset_m(const GeoPoint& origin, double east_m, double north_m);

/// Two-vertex segment with landmarks at the given distances from `a`.
RoadSegment straight(std::string id, const GeoPoint& a, const GeoPoint& b,
                     std::vector<std::pair<SemanticType, double>> landmarks = {},
                     std::optional<double> speed_limit_mps = std::nullopt);

/// Single 1 km eastbound segment "s" at the origin with the given landmarks.
RoadNetwork single_segment(std::vector<std::pair<SemanticType, double>> landmarks);

std::filesystem::path data_path(const std::string& name);

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);

}  // namespace semmatch::testing
