#include "semmatch/semantic_type.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace semmatch {
namespace {

constexpr std::array<std::string_view, kDetectionTypeCount> kNames = {
    "cats_eye", "bump", "curve", "bridge", "tunnel", "turn", "u_turn", "no_class",
};

}  // namespace

std::string_view to_string(SemanticType t) noexcept { return kNames[index_of(t)]; }

std::optional<SemanticType> parse_semantic_type(std::string_view name) noexcept {
  // normalise: lower case, drop apostrophes, map separators to '_'
  std::string key;
  key.reserve(name.size());
  for (char c : name) {
    const auto uc = static_cast<unsigned char>(c);
    if (c == '\'' ) {
      continue;
    }
    if (c == ' ' || c == '-') {
      key.push_back('_');
    } else {
      key.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  if (key == "catseye") {
    key = "cats_eye";
  } else if (key == "uturn") {
    key = "u_turn";
  } else if (key == "noclass" || key == "none") {
    key = "no_class";
  }
  const auto it = std::find(kNames.begin(), kNames.end(), key);
  if (it == kNames.end()) {
    return std::nullopt;
  }
  return static_cast<SemanticType>(it - kNames.begin());
}

}  // namespace semmatch
