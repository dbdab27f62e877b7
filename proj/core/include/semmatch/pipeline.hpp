#pragma once

#include <span>
#include <vector>

#include "semmatch/matcher.hpp"
#include "semmatch/preprocess.hpp"
#include "semmatch/semantics.hpp"
#include "semmatch/trace_io.hpp"

namespace semmatch {

struct PipelineConfig {
  FilterConfig filter;
  HmmConfig hmm;
  ClassifierThresholds thresholds;
  int sensor_bandwidth = 5;  ///< LOESS neighbourhood size
};

/// Turns trace event records into HMM observations. The type comes from the
/// record or from classifying its features; NoClass events are dropped and
/// counted. Missing locations take the latest cleaned fix at or before the
/// event (the first fix when none precedes it); missing headings take the
/// nearest sensor sample. Throws ValidationError when an event has no
/// location and there are no fixes.
std::vector<SemanticEvent> assemble_events(std::span<const TraceEvent> records, std::span<const CleanFix> fixes,
                                           std::span<const SensorSample> sensors,
                                           const ClassifierThresholds& thresholds, std::size_t* dropped = nullptr);

struct PipelineResult {
  std::vector<SensorSample> sensors;  ///< smoothed
  std::vector<CleanFix> fixes;
  std::vector<SemanticEvent> events;
  std::size_t unclassified = 0;
  MatchOutput match;
  std::vector<RouteLeg> legs;
  SegmentPath path;
};

/// preprocess -> event assembly -> matcher for one trace.
PipelineResult run_pipeline(const RoadNetwork& network, const ConfusionMatrix& confusion, const Trace& trace,
                            const PipelineConfig& config);

}  // namespace semmatch
