#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "semmatch/errors.hpp"

namespace {

using namespace semmatch;
using namespace semmatch::cli;

struct Flags {
  std::optional<fs::path> config;
  std::optional<fs::path> network;
  std::vector<fs::path> traces;
  std::optional<fs::path> sensors;
  std::vector<fs::path> truths;
  std::vector<fs::path> matched;
  std::optional<fs::path> confusion;
  std::optional<fs::path> out;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_h;
  std::optional<int> window;
  std::optional<double> alpha;
  std::optional<double> err_scale;
  std::optional<std::string> model;
  std::optional<double> length_km;
  std::optional<double> density;
  std::optional<int> rows;
  std::optional<int> cols;
  std::optional<double> block_m;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("semmatch");
  logger->set_pattern("%^%l%$: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SEMMATCH_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config) apply_file_settings(Settings::load(*f.config), cfg);
  if (f.network) cfg.network = f.network;
  cfg.traces = f.traces;
  if (f.sensors) cfg.sensors = f.sensors;
  cfg.truths = f.truths;
  cfg.matched = f.matched;
  if (f.confusion) cfg.confusion = f.confusion;
  if (f.out) cfg.out = *f.out;
  if (f.preset) cfg.preset = *f.preset;
  if (f.seed) cfg.seed = f.seed;
  if (f.sigma_h) cfg.pipeline.hmm.sigma_h_deg = *f.sigma_h;
  if (f.window) cfg.pipeline.hmm.window = *f.window;
  if (f.alpha) cfg.pipeline.filter.trim_alpha = *f.alpha;
  if (f.err_scale) cfg.pipeline.hmm.err_scale = *f.err_scale;
  if (f.model) {
    Settings s;
    s.set("model", *f.model);
    apply_settings(s, cfg.pipeline.hmm);
  }
  if (f.length_km) cfg.length_km = *f.length_km;
  if (f.density) cfg.grid.density_per_km = *f.density;
  if (f.rows) cfg.grid.rows = *f.rows;
  if (f.cols) cfg.grid.cols = *f.cols;
  if (f.block_m) cfg.grid.block_m = *f.block_m;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Semantic-landmark HMM map matching"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "key = value settings file (flags win)");
    sub->add_option("--network", f.network, "road network GeoJSON");
  };
  auto tuning = [&f](CLI::App* sub) {
    sub->add_option("--sigma-h", f.sigma_h, "heading noise scale in degrees");
    sub->add_option("--window", f.window, "decoding window length");
    sub->add_option("--alpha", f.alpha, "trim fraction of the bouncing filter");
    sub->add_option("--err-scale", f.err_scale, "candidate radius in units of the event error");
    sub->add_option("--model", f.model, "semantic or location_only");
    sub->add_option("--confusion", f.confusion, "confusion counts CSV");
  };

  auto* index = app.add_subcommand("index", "validate a network and print a summary");
  common(index);
  index->add_option("--out", f.out, "write the normalised network here");

  auto* match = app.add_subcommand("match", "match one trace");
  common(match);
  tuning(match);
  match->add_option("--trace", f.traces, "trace JSON-lines")->expected(1);
  match->add_option("--sensors", f.sensors, "separate sensor JSON-lines");
  match->add_option("--out", f.out, "output prefix");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic trace and its truth");
  common(simulate);
  simulate->add_option("--preset", f.preset, "cellular, network or gps_sparse");
  simulate->add_option("--seed", f.seed, "random seed");
  simulate->add_option("--length-km", f.length_km, "route length");
  simulate->add_option("--density", f.density, "landmarks per km on a generated grid");
  simulate->add_option("--rows", f.rows, "generated grid node rows");
  simulate->add_option("--cols", f.cols, "generated grid node columns");
  simulate->add_option("--block-m", f.block_m, "generated grid block length");
  simulate->add_option("--confusion", f.confusion, "confusion counts CSV");
  simulate->add_option("--out", f.out, "output prefix");

  auto* evaluate = app.add_subcommand("evaluate", "score matched paths against truth");
  common(evaluate);
  evaluate->add_option("--truth", f.truths, "truth path JSON (repeatable)");
  evaluate->add_option("--matched", f.matched, "matched path JSON, paired with --truth (repeatable)");
  evaluate->add_option("--out", f.out, "output prefix");

  auto* calibrate = app.add_subcommand("calibrate", "estimate the heading noise scale from truth");
  common(calibrate);
  calibrate->add_option("--trace", f.traces, "trace JSON-lines (repeatable)");
  calibrate->add_option("--truth", f.truths, "truth sidecar, paired with --trace (repeatable)");
  calibrate->add_option("--out", f.out, "write the estimate as a settings file");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve(f);
    if (*index) return cmd_index(cfg);
    if (*match) return cmd_match(cfg);
    if (*simulate) return cmd_simulate(cfg);
    if (*evaluate) return cmd_evaluate(cfg);
    if (*calibrate) return cmd_calibrate(cfg);
  } catch (const semmatch::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 1;
}
