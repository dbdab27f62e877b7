#include "semmatch/network_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "semmatch/errors.hpp"

namespace semmatch {
namespace {

using nlohmann::json;

constexpr double kKmhToMps = 1000.0 / 3600.0;

std::string id_string(const json& v) {
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_number_integer()) {
    return std::to_string(v.get<long long>());
  }
  throw ParseError("segment id must be a string or an integer");
}

GeoPoint position(const json& coord) {
  if (!coord.is_array() || coord.size() < 2 || !coord[0].is_number() || !coord[1].is_number()) {
    throw ParseError("coordinate must be an array [lon, lat]");
  }
  return {coord[1].get<double>(), coord[0].get<double>()};
}

RoadSegment parse_feature(const json& feature, std::size_t index) {
  const std::string where = "feature #" + std::to_string(index);
  if (!feature.is_object() || !feature.contains("geometry") || !feature["geometry"].is_object()) {
    throw ParseError(where + ": missing geometry");
  }
  const json& geom = feature["geometry"];
  if (geom.value("type", "") != "LineString") {
    throw ParseError(where + ": geometry must be a LineString");
  }
  if (!geom.contains("coordinates") || !geom["coordinates"].is_array()) {
    throw ParseError(where + ": missing coordinates");
  }
  const json props = feature.value("properties", json::object());
  if (!props.is_object() || !props.contains("id")) {
    throw ParseError(where + ": missing properties.id");
  }

  RoadSegment seg;
  seg.id = id_string(props["id"]);
  for (const json& c : geom["coordinates"]) {
    seg.polyline.push_back(position(c));
  }
  if (props.contains("maxspeed") && !props["maxspeed"].is_null()) {
    if (!props["maxspeed"].is_number()) {
      throw ParseError(where + ": maxspeed must be a number (km/h)");
    }
    seg.speed_limit_mps = props["maxspeed"].get<double>() * kKmhToMps;
  }
  if (props.contains("semantics") && !props["semantics"].is_null()) {
    if (!props["semantics"].is_array()) {
      throw ParseError(where + ": semantics must be an array");
    }
    for (const json& s : props["semantics"]) {
      if (!s.is_object() || !s.contains("type") || !s["type"].is_string() || !s.contains("lat") ||
          !s.contains("lon") || !s["lat"].is_number() || !s["lon"].is_number()) {
        throw ParseError(where + ": semantic entries need {type, lon, lat}");
      }
      const auto type = parse_semantic_type(s["type"].get<std::string>());
      if (!type) {
        throw ParseError(where + ": unknown semantic type '" + s["type"].get<std::string>() + "'");
      }
      if (!is_landmark_type(*type)) {
        throw ValidationError(where + ": no_class is not a map landmark");
      }
      seg.landmarks.push_back({*type, GeoPoint{s["lat"].get<double>(), s["lon"].get<double>()}, 0.0});
    }
  }
  return seg;
}

}  // namespace

RoadNetwork load_network(std::istream& in, NetworkFormat format) {
  if (format != NetworkFormat::GeoJson) {
    throw ParseError("unsupported network format");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw ParseError("network must be a GeoJSON FeatureCollection");
  }
  std::vector<RoadSegment> segments;
  std::size_t index = 0;
  for (const json& f : doc["features"]) {
    segments.push_back(parse_feature(f, index++));
  }
  return RoadNetwork(std::move(segments));
}

RoadNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open network file '" + path.string() + "'");
  }
  return load_network(in, NetworkFormat::GeoJson);
}

void write_network(std::ostream& out, const RoadNetwork& network, NetworkFormat format) {
  if (format != NetworkFormat::GeoJson) {
    throw ParseError("unsupported network format");
  }
  json features = json::array();
  for (const RoadSegment& seg : network.segments()) {
    json coords = json::array();
    for (const auto& p : seg.polyline) {
      coords.push_back({p.lon, p.lat});
    }
    json semantics = json::array();
    for (const auto& lm : seg.landmarks) {
      semantics.push_back({{"type", std::string(to_string(lm.type))}, {"lon", lm.loc.lon}, {"lat", lm.loc.lat}});
    }
    json props = {{"id", seg.id}, {"semantics", semantics}};
    if (seg.speed_limit_mps) {
      props["maxspeed"] = *seg.speed_limit_mps / kKmhToMps;
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", props}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  out << doc.dump() << '\n';
}

}  // namespace semmatch
