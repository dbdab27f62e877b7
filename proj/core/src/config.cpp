#include "semmatch/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <type_traits>

#include "semmatch/errors.hpp"

namespace semmatch {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string> kFilterKeys = {"speed_window",       "max_speed_mps",         "speed_margin",
                                              "trim_alpha",         "bounce_window",         "turn_threshold_deg",
                                              "confirm_threshold_deg", "sensor_max_gap_s"};
const std::vector<std::string> kHmmKeys = {"sigma_h_deg",    "window",        "err_scale",
                                           "min_candidates", "max_speed_mps", "model"};

std::string qualified(const Settings& s, std::string_view section, std::string_view key) {
  std::string full = std::string(section) + "." + std::string(key);
  return s.contains(full) ? full : std::string(key);
}

template <typename T>
void read_number(const Settings& s, std::string_view section, std::string_view key, T& out) {
  const std::string used = qualified(s, section, key);
  if constexpr (std::is_integral_v<T>) {
    if (auto v = s.get_int(used)) out = static_cast<T>(*v);
  } else {
    if (auto v = s.get_double(used)) out = *v;
  }
}

}  // namespace

Settings Settings::parse(std::istream& in) {
  Settings s;
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '"') quoted = !quoted;
      if (text[i] == '#' && !quoted) {
        text = text.substr(0, i);
        break;
      }
    }
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError("config line " + std::to_string(line) + ": unterminated section");
      section = std::string(trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line) + ": expected key = value");
    }
    const std::string_view key = trim(text.substr(0, eq));
    std::string_view value = trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError("config line " + std::to_string(line) + ": empty key");
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw ParseError("config line " + std::to_string(line) + ": unterminated string");
      }
      value = value.substr(1, value.size() - 2);
    }
    s.set(section.empty() ? std::string(key) : section + "." + std::string(key), std::string(value));
  }
  return s;
}

Settings Settings::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void Settings::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

bool Settings::contains(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> Settings::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Settings::get_double(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("setting '" + std::string(key) + "' must be a number, got '" + *v + "'");
  }
  return out;
}

std::optional<long long> Settings::get_int(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("setting '" + std::string(key) + "' must be an integer, got '" + *v + "'");
  }
  return out;
}

std::optional<bool> Settings::get_bool(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true") return true;
  if (*v == "false") return false;
  throw ConfigError("setting '" + std::string(key) + "' must be true or false, got '" + *v + "'");
}

std::vector<std::string> Settings::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

void apply_settings(const Settings& s, FilterConfig& cfg) {
  read_number(s, "filter", "speed_window", cfg.speed_window);
  read_number(s, "filter", "max_speed_mps", cfg.max_speed_mps);
  read_number(s, "filter", "speed_margin", cfg.speed_margin);
  read_number(s, "filter", "trim_alpha", cfg.trim_alpha);
  read_number(s, "filter", "bounce_window", cfg.bounce_window);
  read_number(s, "filter", "turn_threshold_deg", cfg.turn_threshold_deg);
  read_number(s, "filter", "confirm_threshold_deg", cfg.confirm_threshold_deg);
  read_number(s, "filter", "sensor_max_gap_s", cfg.sensor_max_gap_s);
  cfg.validate();
}

void apply_settings(const Settings& s, HmmConfig& cfg) {
  read_number(s, "hmm", "sigma_h_deg", cfg.sigma_h_deg);
  read_number(s, "hmm", "window", cfg.window);
  read_number(s, "hmm", "err_scale", cfg.err_scale);
  read_number(s, "hmm", "min_candidates", cfg.min_candidates);
  read_number(s, "hmm", "max_speed_mps", cfg.max_speed_mps);
  if (auto m = s.get(qualified(s, "hmm", "model"))) {
    if (*m == "semantic") {
      cfg.model = HmmModel::Semantic;
    } else if (*m == "location_only") {
      cfg.model = HmmModel::LocationOnly;
    } else {
      throw ConfigError("setting 'model' must be semantic or location_only, got '" + *m + "'");
    }
  }
  cfg.validate();
}

std::vector<std::string> known_setting_keys() {
  std::vector<std::string> out;
  for (const auto& k : kFilterKeys) {
    out.push_back(k);
    out.push_back("filter." + k);
  }
  for (const auto& k : kHmmKeys) {
    out.push_back(k);
    out.push_back("hmm." + k);
  }
  return out;
}

}  // namespace semmatch
