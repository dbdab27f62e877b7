#include "semmatch/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semmatch/errors.hpp"

namespace semmatch {
namespace {

using nlohmann::json;

double number(const json& rec, const char* key, std::size_t line) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_number()) {
    throw ParseError("line " + std::to_string(line) + ": \"" + key + "\" must be a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ParseError("line " + std::to_string(line) + ": \"" + key + "\" is not finite");
  return v;
}

std::optional<double> maybe_number(const json& rec, const char* key, std::size_t line) {
  if (!rec.contains(key) || rec[key].is_null()) return std::nullopt;
  return number(rec, key, line);
}

SemanticType type_field(const json& v, std::size_t line) {
  if (!v.is_string()) throw ParseError("line " + std::to_string(line) + ": event type must be a string");
  const auto t = parse_semantic_type(v.get<std::string>());
  if (!t) throw ParseError("line " + std::to_string(line) + ": unknown event type '" + v.get<std::string>() + "'");
  return *t;
}

GeoPoint location(const json& rec, std::size_t line) {
  GeoPoint p{number(rec, "lat", line), number(rec, "lon", line)};
  if (!is_valid(p)) throw ParseError("line " + std::to_string(line) + ": coordinate out of range");
  return p;
}

TraceEvent parse_event(const json& rec, std::size_t line) {
  TraceEvent e;
  e.t = number(rec, "t", line);
  if (rec.contains("type") && !rec["type"].is_null()) e.type = type_field(rec["type"], line);
  if (rec.contains("features")) {
    const json& f = rec["features"];
    if (!f.is_object()) throw ParseError("line " + std::to_string(line) + ": features must be an object");
    FeatureVector v;
    v.gravity_variance = f.value("gravity_variance", v.gravity_variance);
    v.heading_change_deg = f.value("heading_change_deg", v.heading_change_deg);
    v.duration_s = f.value("duration_s", v.duration_s);
    v.elevation_cue = f.value("elevation_cue", v.elevation_cue);
    v.gps_visible = f.value("gps_visible", v.gps_visible);
    e.features = v;
  }
  if (!e.type && !e.features) throw ParseError("line " + std::to_string(line) + ": event needs a type or features");
  if (rec.contains("lat") || rec.contains("lon")) e.loc = location(rec, line);
  e.err_m = maybe_number(rec, "err_m", line);
  if (e.err_m && *e.err_m <= 0.0) throw ParseError("line " + std::to_string(line) + ": err_m must be > 0");
  e.heading_deg = maybe_number(rec, "heading_deg", line);
  return e;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <typename T>
void sort_by_time(std::vector<T>& v) {
  std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.t < b.t; });
}

}  // namespace

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line) + ": invalid JSON: " + e.what());
    }
    if (!rec.is_object()) throw ParseError("line " + std::to_string(line) + ": record must be an object");

    if (rec.contains("trace_id") && !rec.contains("t")) {
      const auto& id = rec["trace_id"];
      trace.trace_id = id.is_string() ? id.get<std::string>() : id.dump();
    } else if (rec.contains("type") || rec.contains("features")) {
      trace.events.push_back(parse_event(rec, line));
    } else if (rec.contains("lat") || rec.contains("lon")) {
      RawFix f;
      f.t = number(rec, "t", line);
      f.loc = location(rec, line);
      f.err_m = number(rec, "err_m", line);
      if (f.err_m <= 0.0) throw ParseError("line " + std::to_string(line) + ": err_m must be > 0");
      trace.fixes.push_back(f);
    } else if (rec.contains("heading_deg") || rec.contains("gvar")) {
      SensorSample s;
      s.t = number(rec, "t", line);
      s.heading_deg = wrap_unsigned_deg(number(rec, "heading_deg", line));
      s.gravity_accel = maybe_number(rec, "gvar", line).value_or(0.0);
      trace.sensors.push_back(s);
    } else {
      throw ParseError("line " + std::to_string(line) + ": unrecognised record");
    }
  }
  sort_by_time(trace.fixes);
  sort_by_time(trace.sensors);
  sort_by_time(trace.events);
  for (std::size_t i = 1; i < trace.sensors.size(); ++i) {
    if (trace.sensors[i].t == trace.sensors[i - 1].t) {
      throw ParseError("duplicate sensor timestamp " + std::to_string(trace.sensors[i].t));
    }
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file '" + path.string() + "'");
  try {
    return read_trace(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_trace(std::ostream& out, const Trace& trace) {
  if (!trace.trace_id.empty()) out << json{{"trace_id", trace.trace_id}}.dump() << '\n';
  for (const RawFix& f : trace.fixes) {
    out << json{{"t", f.t}, {"lat", f.loc.lat}, {"lon", f.loc.lon}, {"err_m", f.err_m}}.dump() << '\n';
  }
  for (const SensorSample& s : trace.sensors) {
    out << json{{"t", s.t}, {"heading_deg", s.heading_deg}, {"gvar", s.gravity_accel}}.dump() << '\n';
  }
  for (const TraceEvent& e : trace.events) {
    json rec{{"t", e.t}};
    if (e.type) rec["type"] = std::string(to_string(*e.type));
    if (e.features) {
      rec["features"] = {{"gravity_variance", e.features->gravity_variance},
                         {"heading_change_deg", e.features->heading_change_deg},
                         {"duration_s", e.features->duration_s},
                         {"elevation_cue", e.features->elevation_cue},
                         {"gps_visible", e.features->gps_visible}};
    }
    if (e.loc) {
      rec["lat"] = e.loc->lat;
      rec["lon"] = e.loc->lon;
    }
    if (e.err_m) rec["err_m"] = *e.err_m;
    if (e.heading_deg) rec["heading_deg"] = *e.heading_deg;
    out << rec.dump() << '\n';
  }
}

TraceTruth read_truth(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("truth file is not valid JSON: ") + e.what());
  }
  std::istringstream path_doc(doc.dump());
  TracePath tp = read_trace_path(path_doc);

  TraceTruth truth;
  truth.trace_id = tp.trace_id;
  truth.path = std::move(tp.path);
  try {
    for (const auto& e : doc.value("events", json::array())) {
      TruthEvent te;
      te.t = e.at("t").get<double>();
      te.segment_id = e.at("segment_id").get<std::string>();
      te.landmark = e.at("landmark").get<std::uint32_t>();
      te.true_type = type_field(e.at("true_type"), 0);
      te.detected_type = type_field(e.at("detected_type"), 0);
      truth.events.push_back(std::move(te));
    }
    truth.missed = doc.value("missed", std::size_t{0});
    truth.pingpong_fix_indices = doc.value("pingpong_fix_indices", std::vector<std::size_t>{});
    truth.truncated = doc.value("truncated", false);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed truth events: ") + e.what());
  }
  return truth;
}

void write_truth(std::ostream& out, const TraceTruth& truth) {
  json path = json::array();
  for (const auto& e : truth.path.elements()) path.push_back({{"segment_id", e.segment_id}, {"length_m", e.length_m}});
  json events = json::array();
  for (const TruthEvent& e : truth.events) {
    events.push_back({{"t", e.t},
                      {"segment_id", e.segment_id},
                      {"landmark", e.landmark},
                      {"true_type", std::string(to_string(e.true_type))},
                      {"detected_type", std::string(to_string(e.detected_type))}});
  }
  out << json{{"trace_id", truth.trace_id},
              {"path", path},
              {"events", events},
              {"missed", truth.missed},
              {"pingpong_fix_indices", truth.pingpong_fix_indices},
              {"truncated", truth.truncated}}
             .dump()
      << '\n';
}

void write_match_records(std::ostream& out, const RoadNetwork& network, const MatchOutput& output) {
  for (const MatchRecord& r : output.records) {
    json rec{{"t", r.t}};
    if (r.state) {
      const HiddenState& s = network.state(*r.state);
      rec["segment_id"] = network.segment(s.segment).id;
      rec["lat"] = s.loc.lat;
      rec["lon"] = s.loc.lon;
    } else {
      rec["segment_id"] = nullptr;
      rec["lat"] = nullptr;
      rec["lon"] = nullptr;
    }
    rec["loglik"] = nullable(r.loglik);
    rec["stale"] = r.stale;
    out << rec.dump() << '\n';
  }
}

void write_path_geojson(std::ostream& out, const RoadNetwork& network, std::span<const RouteLeg> legs) {
  json features = json::array();
  for (const RouteLeg& leg : legs) {
    const RoadSegment& seg = network.segment(leg.segment);
    const double lo = std::min(leg.from_offset_m, leg.to_offset_m);
    const double hi = std::max(leg.from_offset_m, leg.to_offset_m);
    std::vector<GeoPoint> pts{network.point_at(leg.segment, lo)};
    double acc = 0.0;
    for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
      acc += geodesic_distance(seg.polyline[i - 1], seg.polyline[i]);
      if (acc > lo && acc < hi) pts.push_back(seg.polyline[i]);
    }
    pts.push_back(network.point_at(leg.segment, hi));
    if (!leg.forward()) std::reverse(pts.begin(), pts.end());

    json coords = json::array();
    for (const GeoPoint& p : pts) coords.push_back({p.lon, p.lat});
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", {{"segment_id", seg.id}, {"length_m", leg.length_m()}}}});
  }
  out << json{{"type", "FeatureCollection"}, {"features", features}}.dump() << '\n';
}

}  // namespace semmatch
