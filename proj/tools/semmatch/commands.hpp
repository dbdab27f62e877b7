#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semmatch/config.hpp"
#include "semmatch/pipeline.hpp"
#include "semmatch/sim.hpp"

namespace semmatch::cli {

namespace fs = std::filesystem;

/// Everything a subcommand needs. Filled from the config file first, then
/// from flags.
struct RunConfig {
  std::optional<fs::path> network;
  std::vector<fs::path> traces;
  std::optional<fs::path> sensors;
  std::vector<fs::path> truths;
  std::vector<fs::path> matched;
  std::optional<fs::path> confusion;
  fs::path out;

  PipelineConfig pipeline;
  std::string preset = "cellular";
  std::optional<std::uint64_t> seed;

  double length_km = 10.0;
  sim::GridSpec grid;
};

/// Applies filter, hmm and sim.* keys from a settings file.
void apply_file_settings(const Settings& s, RunConfig& cfg);

int cmd_index(const RunConfig& cfg);
int cmd_match(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_calibrate(const RunConfig& cfg);

}  // namespace semmatch::cli
