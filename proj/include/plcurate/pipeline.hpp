#pragma once

#include <string>
#include <vector>

#include "plcurate/config.hpp"

namespace plcurate::pipeline {

// Exit codes shared by all commands: 0 success, 1 usage/input error, 2 batch
// failure (empty input or too many per-entry failures).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBatchFailure = 2;

// Parse, match, score and annotate every manifest entry; writes scored.jsonl,
// scored.csv and errors.jsonl under out_dir. Per-entry failures become error
// rows and never abort the batch.
int cmd_score(const config::PipelineConfig& cfg, const std::string& manifest_path,
              const std::string& out_dir);

// Triage labels plus Sankey flows (labels.csv, sankey.csv, sankey.json) and,
// when quality data is present, success_rates.csv and
// confidence_quality_tau.csv.
int cmd_triage(const config::PipelineConfig& cfg, const std::string& manifest_path,
               const std::string& out_dir);

// Rebuild the Sankey reports from a labels.csv produced by cmd_triage.
int cmd_sankey(const config::PipelineConfig& cfg, const std::string& labels_path,
               const std::string& out_dir);

// Element gate plus Tanimoto leakage filter against a test-set SDF; writes
// kept.jsonl, removed.jsonl, rejected.csv, audit.csv and errors.jsonl.
int cmd_filter(const config::PipelineConfig& cfg, const std::string& manifest_path,
               const std::string& test_ligands_path, const std::string& out_dir);

// Weighted benchmark statistics over a predictions CSV; writes aggregate.json
// and per_series.csv.
int cmd_evaluate(const config::PipelineConfig& cfg, const std::string& predictions_path,
                 const std::string& out_dir);

// Nested random subset manifests per confidence partition.
int cmd_subsets(const config::PipelineConfig& cfg, const std::string& manifest_path,
                const std::vector<std::size_t>& sizes, const std::string& out_dir);

// Shared file helpers.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace plcurate::pipeline
