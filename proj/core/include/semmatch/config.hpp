#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semmatch/hmm_model.hpp"
#include "semmatch/preprocess.hpp"

namespace semmatch {

/// Flat key = value settings in a small TOML subset: '#' comments, bare or
/// double-quoted values, and [section] headers that prefix the following
/// keys with "section.".
class Settings {
 public:
  /// Throws ParseError with the line number.
  static Settings parse(std::istream& in);
  /// Throws ParseError naming the path.
  static Settings load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  /// Typed lookups; ConfigError when present but malformed.
  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;

  std::vector<std::string> keys() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Reads FilterConfig fields from "filter.<field>" or the bare field name,
/// then validates the result.
void apply_settings(const Settings& s, FilterConfig& cfg);
/// Reads HmmConfig fields from "hmm.<field>" or the bare field name;
/// "model" takes "semantic" or "location_only". Validates the result.
void apply_settings(const Settings& s, HmmConfig& cfg);

/// Keys understood by apply_settings.
std::vector<std::string> known_setting_keys();

}  // namespace semmatch
