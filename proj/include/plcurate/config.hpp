#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "plcurate/errors.hpp"

namespace plcurate::config {

struct ConfigError : Error {
  using Error::Error;
};

// Pipeline defaults follow the curation heuristics: confidence gate 0.9,
// high-quality pocket RMSD 2.0, leakage cutoff 0.9, hybrid partitions at
// 1.0 / 1.2.
struct PipelineConfig {
  double confidence_threshold = 0.9;
  double pocket_rmsd_threshold = 2.0;
  double tanimoto_cutoff = 0.9;
  double hybrid_low = 1.0;
  double hybrid_high = 1.2;
  std::vector<double> similarity_bins = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

  int workers = 1;
  std::uint64_t seed = 0;
  double failure_exit_fraction = 0.5;  // exit code 2 above this failure share

  bool compute_plausibility = true;  // false: trust ingested physical flags
  double bond_tolerance = 0.25;
  double clash_factor = 0.75;
  std::string radius_table_path;  // empty: builtin radii

  int bootstrap_samples = 10000;
  double ci_level = 0.95;
  int min_series_size = 10;

  void validate() const;  // throws ConfigError on out-of-range values
};

// Minimal TOML subset: `key = value` lines, # comments, [section] headers
// (organisational only), strings in double quotes, numbers, booleans and
// flat numeric arrays. Unknown keys are rejected.
PipelineConfig load_config_toml(std::string_view text, PipelineConfig base = {});

}  // namespace plcurate::config
