#include "semmatch/eval.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "semmatch/errors.hpp"

namespace semmatch {

SegmentPath::SegmentPath(std::vector<PathElement> elements) {
  for (auto& e : elements) {
    append(std::move(e.segment_id), e.length_m);
  }
}

void SegmentPath::append(std::string segment_id, double length_m) {
  if (!(length_m > 0.0)) {
    return;
  }
  if (!elements_.empty() && elements_.back().segment_id == segment_id) {
    elements_.back().length_m += length_m;
    return;
  }
  elements_.push_back({std::move(segment_id), length_m});
}

double SegmentPath::total_length_m() const noexcept {
  double total = 0.0;
  for (const auto& e : elements_) {
    total += e.length_m;
  }
  return total;
}

SegmentPath path_from_legs(const RoadNetwork& network, std::span<const RouteLeg> legs) {
  SegmentPath path;
  for (const RouteLeg& leg : legs) {
    path.append(network.segment(leg.segment).id, leg.length_m());
  }
  return path;
}

CommonSequence common_sequence(const SegmentPath& output, const SegmentPath& truth) {
  const auto out = output.elements();
  const auto ref = truth.elements();
  const std::size_t n = out.size();
  const std::size_t m = ref.size();
  // best[i][j]: max matched length using out[..i) and ref[..j)
  std::vector<double> best((n + 1) * (m + 1), 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return best[i * (m + 1) + j]; };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double v = std::max(at(i - 1, j), at(i, j - 1));
      if (out[i - 1].segment_id == ref[j - 1].segment_id) {
        v = std::max(v, at(i - 1, j - 1) + std::min(out[i - 1].length_m, ref[j - 1].length_m));
      }
      at(i, j) = v;
    }
  }
  CommonSequence result;
  result.matched_m = at(n, m);
  for (std::size_t i = n, j = m; i > 0 && j > 0;) {
    if (out[i - 1].segment_id == ref[j - 1].segment_id &&
        at(i, j) == at(i - 1, j - 1) + std::min(out[i - 1].length_m, ref[j - 1].length_m)) {
      result.segment_ids.push_back(out[i - 1].segment_id);
      --i;
      --j;
    } else if (at(i, j) == at(i - 1, j)) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(result.segment_ids.begin(), result.segment_ids.end());
  return result;
}

Score score(const SegmentPath& output, const SegmentPath& truth) {
  Score s;
  s.truth_m = truth.total_length_m();
  if (!(s.truth_m > 0.0)) {
    throw std::invalid_argument("ground-truth path has zero length");
  }
  if (output.empty()) {
    s.empty_output = true;
    return s;
  }
  const double output_m = output.total_length_m();
  s.matched_m = common_sequence(output, truth).matched_m;
  s.unmatched_m = std::max(0.0, output_m - s.matched_m);
  s.precision = s.matched_m / output_m;
  s.recall = s.matched_m / s.truth_m;
  const double denom = s.precision + s.recall;
  s.f_measure = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

TracePath read_trace_path(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("path file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("path") || !doc["path"].is_array()) {
    throw ParseError("path file needs a \"path\" array");
  }
  TracePath tp;
  tp.trace_id = doc.value("trace_id", "");
  for (const auto& e : doc["path"]) {
    if (!e.is_object() || !e.contains("segment_id") || !e.contains("length_m") || !e["length_m"].is_number()) {
      throw ParseError("path elements need {segment_id, length_m}");
    }
    const auto& id = e["segment_id"];
    tp.path.append(id.is_string() ? id.get<std::string>() : id.dump(), e["length_m"].get<double>());
  }
  return tp;
}

void write_trace_path(std::ostream& out, const TracePath& path) {
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& e : path.path.elements()) {
    elements.push_back({{"segment_id", e.segment_id}, {"length_m", e.length_m}});
  }
  out << nlohmann::json{{"trace_id", path.trace_id}, {"path", elements}}.dump() << '\n';
}

}  // namespace semmatch
