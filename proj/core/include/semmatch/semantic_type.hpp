#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace semmatch {

/// Road semantic classes. NoClass is a detection outcome only and never
/// appears as a map landmark.
enum class SemanticType : std::uint8_t {
  CatsEye = 0,
  Bump,
  Curve,
  Bridge,
  Tunnel,
  Turn,
  UTurn,
  NoClass,
};

inline constexpr std::size_t kLandmarkTypeCount = 7;
inline constexpr std::size_t kDetectionTypeCount = 8;

inline constexpr std::array<SemanticType, kLandmarkTypeCount> kLandmarkTypes = {
    SemanticType::CatsEye, SemanticType::Bump, SemanticType::Curve, SemanticType::Bridge,
    SemanticType::Tunnel,  SemanticType::Turn, SemanticType::UTurn,
};

constexpr std::size_t index_of(SemanticType t) noexcept { return static_cast<std::size_t>(t); }

constexpr bool is_landmark_type(SemanticType t) noexcept { return t != SemanticType::NoClass; }

/// Wire name: "cats_eye", "bump", "curve", "bridge", "tunnel", "turn", "u_turn", "no_class".
std::string_view to_string(SemanticType t) noexcept;

/// Parses a wire name; also accepts the display labels used in CSV headers
/// ("Cat's eye", "U-turn", "No Class"). Returns nullopt on unknown names.
std::optional<SemanticType> parse_semantic_type(std::string_view name) noexcept;

}  // namespace semmatch
