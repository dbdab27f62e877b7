#pragma once

#include <filesystem>
#include <iosfwd>

#include "semmatch/road_network.hpp"

namespace semmatch {

enum class NetworkFormat {
  GeoJson,  ///< FeatureCollection of LineStrings; properties {id, maxspeed (km/h), semantics:[{type, lon, lat}]}
};

/// Parses and validates a network. Throws ParseError for malformed input and
/// ValidationError for invariant violations (including an empty network).
RoadNetwork load_network(std::istream& in, NetworkFormat format = NetworkFormat::GeoJson);
RoadNetwork load_network(const std::filesystem::path& path);

/// Writes the network in the format load_network reads.
void write_network(std::ostream& out, const RoadNetwork& network, NetworkFormat format = NetworkFormat::GeoJson);

}  // namespace semmatch
