#include "semmatch/semantics.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semmatch/errors.hpp"

namespace semmatch {
namespace {

void require_landmark(SemanticType t) {
  if (!is_landmark_type(t)) {
    throw std::invalid_argument("no_class is not a landmark type");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r\"");
    const auto e = cell.find_last_not_of(" \t\r\"");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

}  // namespace

SemanticType classify(const FeatureVector& f, const ClassifierThresholds& th) {
  if (!f.gps_visible) {
    return SemanticType::Tunnel;
  }
  const double turn = std::abs(f.heading_change_deg);
  if (turn >= th.uturn_min_deg && turn <= th.uturn_max_deg) {
    return SemanticType::UTurn;
  }
  if (turn >= th.turn_min_deg && turn <= th.turn_max_deg) {
    return SemanticType::Turn;
  }
  if (turn >= th.curve_min_deg && turn < th.turn_min_deg && f.duration_s > th.curve_min_duration_s) {
    return SemanticType::Curve;
  }
  if (f.elevation_cue >= th.bridge_elevation_min) {
    return SemanticType::Bridge;
  }
  if (f.gravity_variance >= th.catseye_variance_min) {
    if (f.gravity_variance >= th.bump_variance_min && f.duration_s <= th.bump_max_duration_s) {
      return SemanticType::Bump;
    }
    return SemanticType::CatsEye;
  }
  return SemanticType::NoClass;
}

const ConfusionCounts& default_confusion_counts() noexcept {
  //                                cat  bump curve brdg tunl turn utrn none
  static const ConfusionCounts counts = {{
      {22, 0, 0, 0, 0, 0, 0, 5},   // cat's eye
      {0, 37, 0, 0, 0, 0, 0, 0},   // bump
      {0, 0, 33, 0, 0, 0, 0, 0},   // curve
      {0, 0, 0, 11, 0, 0, 0, 3},   // bridge
      {0, 0, 0, 0, 15, 0, 0, 0},   // tunnel
      {0, 0, 0, 0, 0, 55, 0, 0},   // turn
      {0, 0, 0, 0, 0, 0, 12, 0},   // u-turn
  }};
  return counts;
}

ConfusionMatrix ConfusionMatrix::from_counts(const ConfusionCounts& counts, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("confusion smoothing must be finite and >= 0");
  }
  ConfusionMatrix m;
  m.counts_ = counts;
  m.epsilon_ = epsilon;
  for (std::size_t r = 0; r < kLandmarkTypeCount; ++r) {
    double total = 0.0;
    for (double c : counts[r]) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw ValidationError("confusion counts must be finite and non-negative");
      }
      total += c + epsilon;
    }
    if (!(total > 0.0)) {
      throw ValidationError("confusion row '" + std::string(to_string(kLandmarkTypes[r])) + "' has no mass");
    }
    for (std::size_t c = 0; c < kDetectionTypeCount; ++c) {
      m.probs_[r][c] = (counts[r][c] + epsilon) / total;
    }
  }
  return m;
}

ConfusionMatrix ConfusionMatrix::standard(double epsilon) {
  return from_counts(default_confusion_counts(), epsilon);
}

double ConfusionMatrix::detection_prob(SemanticType detected, SemanticType true_type) const {
  require_landmark(true_type);
  return probs_[index_of(true_type)][index_of(detected)];
}

double ConfusionMatrix::miss_prob(SemanticType true_type) const {
  return detection_prob(SemanticType::NoClass, true_type);
}

ConfusionCounts read_confusion_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("confusion CSV is empty");
  }
  const auto header = split_csv(line);
  if (header.size() != kDetectionTypeCount + 1) {
    throw ParseError("confusion CSV header needs a corner cell and 8 type names");
  }
  std::array<std::size_t, kDetectionTypeCount> column_type{};
  for (std::size_t c = 0; c < kDetectionTypeCount; ++c) {
    const auto t = parse_semantic_type(header[c + 1]);
    if (!t) {
      throw ParseError("unknown type in confusion CSV header: '" + header[c + 1] + "'");
    }
    column_type[c] = index_of(*t);
  }
  ConfusionCounts counts{};
  std::array<bool, kLandmarkTypeCount> seen{};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != kDetectionTypeCount + 1) {
      throw ParseError("confusion CSV line " + std::to_string(line_no) + " needs 9 cells");
    }
    const auto row = parse_semantic_type(cells[0]);
    if (!row || !is_landmark_type(*row)) {
      throw ParseError("confusion CSV line " + std::to_string(line_no) + ": bad row type '" + cells[0] + "'");
    }
    if (seen[index_of(*row)]) {
      throw ParseError("confusion CSV repeats row '" + cells[0] + "'");
    }
    seen[index_of(*row)] = true;
    for (std::size_t c = 0; c < kDetectionTypeCount; ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c + 1], &used);
        if (used != cells[c + 1].size()) {
          throw std::invalid_argument("trailing characters");
        }
        counts[index_of(*row)][column_type[c]] = v;
      } catch (const std::logic_error&) {
        throw ParseError("confusion CSV line " + std::to_string(line_no) + ": '" + cells[c + 1] + "' is not a number");
      }
    }
  }
  for (std::size_t r = 0; r < kLandmarkTypeCount; ++r) {
    if (!seen[r]) {
      throw ParseError("confusion CSV lacks row '" + std::string(to_string(kLandmarkTypes[r])) + "'");
    }
  }
  return counts;
}

void write_confusion_csv(std::ostream& out, const ConfusionCounts& counts) {
  out << "true\\detected";
  for (std::size_t c = 0; c < kDetectionTypeCount; ++c) {
    out << ',' << to_string(static_cast<SemanticType>(c));
  }
  out << '\n';
  for (std::size_t r = 0; r < kLandmarkTypeCount; ++r) {
    out << to_string(kLandmarkTypes[r]);
    for (double v : counts[r]) {
      out << ',' << v;
    }
    out << '\n';
  }
}

}  // namespace semmatch
