#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "semmatch/errors.hpp"
#include "semmatch/network_io.hpp"
#include "semmatch/trace_io.hpp"

namespace semmatch::cli {
namespace {

using nlohmann::json;

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return fs::path(prefix.string() + suffix);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error("failed writing '" + path.string() + "'");
  spdlog::debug("wrote {}", path.string());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out = open_output(path);
  writer(out);
  close_output(out, path);
}

const fs::path& require(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw ConfigError(std::string("missing required ") + flag);
  return *p;
}

ConfusionCounts load_counts(const RunConfig& cfg) {
  if (!cfg.confusion) return default_confusion_counts();
  std::ifstream in(*cfg.confusion);
  if (!in) throw ParseError("cannot open confusion file '" + cfg.confusion->string() + "'");
  return read_confusion_csv(in);
}

ConfusionMatrix load_confusion(const RunConfig& cfg) { return ConfusionMatrix::from_counts(load_counts(cfg)); }

TracePath load_trace_path(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open path file '" + path.string() + "'");
  try {
    return read_trace_path(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

TraceTruth load_truth(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open truth file '" + path.string() + "'");
  try {
    return read_truth(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

const HiddenState& truth_state(const RoadNetwork& network, const TruthEvent& e) {
  const auto seg = network.find_segment(e.segment_id);
  if (!seg) throw ValidationError("truth refers to unknown segment '" + e.segment_id + "'");
  const auto states = network.states_on(*seg);
  if (e.landmark >= states.size()) {
    throw ValidationError("truth refers to landmark " + std::to_string(e.landmark) + " on segment '" + e.segment_id +
                          "' which has " + std::to_string(states.size()));
  }
  return states[e.landmark];
}

json score_json(const std::string& id, const Score& s) {
  return {{"trace_id", id},
          {"precision", s.precision},
          {"recall", s.recall},
          {"f_measure", s.f_measure},
          {"matched_m", s.matched_m},
          {"unmatched_m", s.unmatched_m},
          {"truth_m", s.truth_m},
          {"empty_output", s.empty_output}};
}

}  // namespace

void apply_file_settings(const Settings& s, RunConfig& cfg) {
  apply_settings(s, cfg.pipeline.filter);
  apply_settings(s, cfg.pipeline.hmm);
  if (auto v = s.get("sim.preset")) cfg.preset = *v;
  if (auto v = s.get_int("sim.seed")) cfg.seed = static_cast<std::uint64_t>(*v);
  if (auto v = s.get_double("sim.length_km")) cfg.length_km = *v;
  if (auto v = s.get_double("sim.density_per_km")) cfg.grid.density_per_km = *v;
  if (auto v = s.get_int("sim.rows")) cfg.grid.rows = static_cast<int>(*v);
  if (auto v = s.get_int("sim.cols")) cfg.grid.cols = static_cast<int>(*v);
  if (auto v = s.get_double("sim.block_m")) cfg.grid.block_m = *v;
  if (auto v = s.get_int("sensor_bandwidth")) cfg.pipeline.sensor_bandwidth = static_cast<int>(*v);
}

int cmd_index(const RunConfig& cfg) {
  const RoadNetwork network = load_network(require(cfg.network, "--network"));
  std::map<std::string, int> by_type;
  for (SemanticType t : kLandmarkTypes) by_type[std::string(to_string(t))] = 0;
  for (const HiddenState& s : network.states()) ++by_type[std::string(to_string(s.type))];
  const json summary{{"segments", network.segments().size()},
                     {"nodes", network.node_count()},
                     {"states", network.states().size()},
                     {"total_length_m", network.total_length_m()},
                     {"states_by_type", by_type}};
  std::cout << summary.dump() << '\n';
  if (!cfg.out.empty()) write_file(cfg.out, [&](std::ostream& o) { write_network(o, network); });
  return 0;
}

int cmd_match(const RunConfig& cfg) {
  if (cfg.traces.size() != 1) throw ConfigError("match needs exactly one --trace");
  if (cfg.out.empty()) throw ConfigError("missing required --out");
  const RoadNetwork network = load_network(require(cfg.network, "--network"));
  const ConfusionMatrix confusion = load_confusion(cfg);

  Trace trace = read_trace(cfg.traces.front());
  if (cfg.sensors) {
    const Trace extra = read_trace(*cfg.sensors);
    if (!trace.sensors.empty() && !extra.sensors.empty()) {
      throw ConfigError("sensor samples found in both the trace and --sensors");
    }
    trace.sensors.insert(trace.sensors.end(), extra.sensors.begin(), extra.sensors.end());
  }
  if (trace.trace_id.empty()) trace.trace_id = cfg.traces.front().stem().string();

  const PipelineResult res = run_pipeline(network, confusion, trace, cfg.pipeline);
  spdlog::info("{}: {} fixes, {} events ({} unclassified), {} stale, {} restarts", trace.trace_id, res.fixes.size(),
               res.events.size(), res.unclassified, res.match.stale_steps, res.match.chain_restarts);

  write_file(with_suffix(cfg.out, ".matches.jsonl"),
             [&](std::ostream& o) { write_match_records(o, network, res.match); });
  write_file(with_suffix(cfg.out, ".path.geojson"), [&](std::ostream& o) { write_path_geojson(o, network, res.legs); });
  write_file(with_suffix(cfg.out, ".path.json"),
             [&](std::ostream& o) { write_trace_path(o, TracePath{trace.trace_id, res.path}); });
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  if (!cfg.seed) throw ConfigError("simulate needs --seed");
  if (cfg.out.empty()) throw ConfigError("missing required --out");
  const sim::NoiseModel noise = sim::NoiseModel::preset(cfg.preset);
  // detections are drawn from the raw counts, without smoothing
  const ConfusionMatrix confusion = ConfusionMatrix::from_counts(load_counts(cfg), 0.0);

  std::optional<RoadNetwork> loaded;
  if (cfg.network) {
    loaded.emplace(load_network(*cfg.network));
  } else {
    sim::GridSpec grid = cfg.grid;
    grid.seed = *cfg.seed;
    loaded.emplace(sim::generate_network(grid));
  }
  const RoadNetwork& network = *loaded;

  sim::RouteSpec route;
  route.length_km = cfg.length_km;
  const sim::SimTrace st = sim::simulate_trace(network, confusion, noise, route, *cfg.seed);
  if (st.route.truncated) spdlog::warn("route truncated at a dead end");

  Trace trace;
  trace.trace_id = st.trace_id;
  trace.fixes = st.fixes.fixes;
  trace.sensors = st.sensors;
  TraceTruth truth;
  truth.trace_id = st.trace_id;
  truth.path = st.route.path;
  truth.missed = st.events.missed.size();
  truth.pingpong_fix_indices = st.fixes.pingpong_indices;
  truth.truncated = st.route.truncated;
  for (const sim::EmittedEvent& e : st.events.events) {
    trace.events.push_back({e.event.t, e.event.type, std::nullopt, e.event.loc, e.event.err_m, e.event.heading_deg});
    const HiddenState& s = network.state(e.true_state);
    truth.events.push_back({e.event.t, network.segment(s.segment).id, s.rank, s.type, e.event.type});
  }

  write_file(with_suffix(cfg.out, ".trace.jsonl"), [&](std::ostream& o) { write_trace(o, trace); });
  write_file(with_suffix(cfg.out, ".truth.json"), [&](std::ostream& o) { write_truth(o, truth); });
  if (!cfg.network) {
    write_file(with_suffix(cfg.out, ".network.geojson"), [&](std::ostream& o) { write_network(o, network); });
  }
  spdlog::info("{}: {} fixes, {} events, {} missed, {:.0f} m route", st.trace_id, trace.fixes.size(),
               trace.events.size(), truth.missed, truth.path.total_length_m());
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  if (cfg.truths.empty()) throw ConfigError("evaluate needs at least one --truth");
  if (cfg.truths.size() != cfg.matched.size()) throw ConfigError("--matched and --truth must be given in pairs");
  if (cfg.out.empty()) throw ConfigError("missing required --out");

  json traces = json::array();
  std::string csv = "trace_id,precision,recall,f_measure,matched_m,unmatched_m,truth_m,empty_output\n";
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  for (std::size_t i = 0; i < cfg.truths.size(); ++i) {
    const TracePath truth = load_trace_path(cfg.truths[i]);
    const TracePath output = load_trace_path(cfg.matched[i]);
    if (!truth.trace_id.empty() && !output.trace_id.empty() && truth.trace_id != output.trace_id) {
      throw ValidationError("trace id mismatch: '" + output.trace_id + "' matched against truth '" + truth.trace_id +
                            "'");
    }
    const std::string id = truth.trace_id.empty() ? output.trace_id : truth.trace_id;
    const Score s = score(output.path, truth.path);
    if (s.empty_output) spdlog::warn("{}: empty output", id);
    traces.push_back(score_json(id, s));
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", id, s.precision, s.recall, s.f_measure, s.matched_m,
                       s.unmatched_m, s.truth_m, s.empty_output ? 1 : 0);
    sum_p += s.precision;
    sum_r += s.recall;
    sum_f += s.f_measure;
  }
  const double n = static_cast<double>(cfg.truths.size());
  const json mean{{"precision", sum_p / n}, {"recall", sum_r / n}, {"f_measure", sum_f / n}};
  write_file(with_suffix(cfg.out, ".scores.json"),
             [&](std::ostream& o) { o << json{{"traces", traces}, {"mean", mean}}.dump(2) << '\n'; });
  write_file(with_suffix(cfg.out, ".scores.csv"), [&](std::ostream& o) { o << csv; });
  std::cout << mean.dump() << '\n';
  return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
  if (cfg.traces.empty()) throw ConfigError("calibrate needs at least one --trace");
  if (cfg.traces.size() != cfg.truths.size()) throw ConfigError("--trace and --truth must be given in pairs");
  const RoadNetwork network = load_network(require(cfg.network, "--network"));

  std::vector<HeadingPair> pairs;
  for (std::size_t i = 0; i < cfg.traces.size(); ++i) {
    const Trace trace = read_trace(cfg.traces[i]);
    const TraceTruth truth = load_truth(cfg.truths[i]);
    if (trace.events.size() != truth.events.size()) {
      throw ValidationError(cfg.traces[i].string() + ": " + std::to_string(trace.events.size()) +
                            " events but truth lists " + std::to_string(truth.events.size()));
    }
    for (std::size_t k = 1; k < trace.events.size(); ++k) {
      const auto& a = trace.events[k - 1];
      const auto& b = trace.events[k];
      if (!a.heading_deg || !b.heading_deg) throw ValidationError("calibration events need heading_deg");
      const double observed = wrap_signed_deg(*b.heading_deg - *a.heading_deg);
      const double map = state_heading_change(truth_state(network, truth.events[k - 1]),
                                              truth_state(network, truth.events[k]), observed);
      pairs.push_back({observed, map});
    }
  }
  if (pairs.empty()) throw ValidationError("no heading pairs: calibration needs at least two events per trace");
  const double raw = estimate_sigma_h(pairs);
  const double sigma = std::max(raw, kSigmaHFloorDeg);
  spdlog::info("{} pairs, MAD estimate {:.4f} deg", pairs.size(), raw);
  std::cout << json{{"pairs", pairs.size()}, {"sigma_h_deg", sigma}, {"mad_estimate_deg", raw}}.dump() << '\n';
  if (!cfg.out.empty()) {
    write_file(cfg.out, [&](std::ostream& o) { o << "[hmm]\nsigma_h_deg = " << json(sigma).dump() << '\n'; });
  }
  return 0;
}

}  // namespace semmatch::cli
