#include "semmatch/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "semmatch/errors.hpp"

namespace semmatch {

std::vector<SemanticEvent> assemble_events(std::span<const TraceEvent> records, std::span<const CleanFix> fixes,
                                           std::span<const SensorSample> sensors,
                                           const ClassifierThresholds& thresholds, std::size_t* dropped) {
  std::vector<SemanticEvent> out;
  std::size_t unclassified = 0;
  for (const TraceEvent& r : records) {
    const SemanticType type = r.type ? *r.type : classify(*r.features, thresholds);
    if (type == SemanticType::NoClass) {
      ++unclassified;
      continue;
    }
    SemanticEvent e;
    e.t = r.t;
    e.type = type;
    if (r.loc) {
      e.loc = *r.loc;
      e.err_m = r.err_m.value_or(1.0);
    } else {
      if (fixes.empty()) throw ValidationError("event at t=" + std::to_string(r.t) + " has no location and no fixes");
      auto it = std::upper_bound(fixes.begin(), fixes.end(), r.t,
                                 [](double t, const CleanFix& f) { return t < f.t; });
      const CleanFix& f = it == fixes.begin() ? *it : *std::prev(it);
      e.loc = f.loc;
      e.err_m = r.err_m.value_or(f.err_m);
    }
    if (r.heading_deg) {
      e.heading_deg = wrap_unsigned_deg(*r.heading_deg);
    } else if (!sensors.empty()) {
      auto it = std::lower_bound(sensors.begin(), sensors.end(), r.t,
                                 [](const SensorSample& s, double t) { return s.t < t; });
      if (it == sensors.end() || (it != sensors.begin() && r.t - std::prev(it)->t <= it->t - r.t)) --it;
      e.heading_deg = it->heading_deg;
    }
    out.push_back(e);
  }
  if (dropped) *dropped = unclassified;
  return out;
}

PipelineResult run_pipeline(const RoadNetwork& network, const ConfusionMatrix& confusion, const Trace& trace,
                            const PipelineConfig& config) {
  config.filter.validate();
  config.hmm.validate();

  PipelineResult res;
  res.sensors = smooth_sensors(trace.sensors, config.sensor_bandwidth);
  const SpeedLimitLookup limits = [&network](const GeoPoint& p) { return network.speed_limit_near(p, 50.0); };
  res.fixes = preprocess_fixes(trace.fixes, res.sensors, config.filter, limits);
  res.events = assemble_events(trace.events, res.fixes, res.sensors, config.thresholds, &res.unclassified);

  Matcher matcher(network, confusion, config.hmm);
  for (const SemanticEvent& e : res.events) matcher.step(e);
  res.match = matcher.finish();
  res.legs = legs_through_states(network, res.match.path);
  res.path = path_from_legs(network, res.legs);
  return res;
}

}  // namespace semmatch
