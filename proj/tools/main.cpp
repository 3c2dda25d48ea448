// plcurate: batch curation and evaluation of co-folded protein-ligand
// complex predictions.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plcurate/config.hpp"
#include "plcurate/pipeline.hpp"

namespace {

using plcurate::config::PipelineConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> confidence_threshold;
  std::optional<double> pocket_rmsd_threshold;
  std::optional<double> tanimoto_cutoff;
  std::optional<double> hybrid_low;
  std::optional<double> hybrid_high;
  std::optional<std::vector<double>> similarity_bins;
  std::optional<bool> compute_plausibility;
  std::optional<std::string> radius_table;
  std::optional<int> bootstrap_samples;
  std::optional<double> ci_level;
  std::optional<int> min_series_size;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "TOML config file");
  cmd->add_option("--out-dir", args.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--workers", args.workers, "worker thread count (or PLCURATE_WORKERS)");
  cmd->add_option("--seed", args.seed, "seed for all randomised steps");
  cmd->add_option("--confidence-threshold", args.confidence_threshold,
                  "high-confidence gate (default 0.9, strict >)");
  cmd->add_option("--pocket-rmsd-threshold", args.pocket_rmsd_threshold,
                  "high-quality gate in angstroms (default 2.0, strict <)");
  cmd->add_option("--tanimoto-cutoff", args.tanimoto_cutoff,
                  "leakage similarity cutoff (default 0.9, strict >)");
  cmd->add_option("--hybrid-low", args.hybrid_low, "hybrid-score low/moderate boundary");
  cmd->add_option("--hybrid-high", args.hybrid_high, "hybrid-score moderate/high boundary");
  cmd->add_option("--bins", args.similarity_bins,
                  "train-test similarity bin edges (ascending)");
  cmd->add_flag("--no-plausibility{false},--plausibility{true}", args.compute_plausibility,
                "compute physical checks (default) or trust ingested flags");
  cmd->add_option("--radius-table", args.radius_table, "CSV radius table override");
  cmd->add_option("--bootstrap-samples", args.bootstrap_samples,
                  "bootstrap replicate count (default 10000)");
  cmd->add_option("--ci-level", args.ci_level, "confidence interval level (default 0.95)");
  cmd->add_option("--min-series-size", args.min_series_size,
                  "minimum ligands per benchmark series (default 10)");
}

PipelineConfig resolve_config(const CommonArgs& args) {
  PipelineConfig cfg;
  if (const char* env = std::getenv("PLCURATE_WORKERS")) {
    try {
      cfg.workers = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw plcurate::config::ConfigError("PLCURATE_WORKERS is not an integer");
    }
  }
  if (!args.config_path.empty())
    cfg = plcurate::config::load_config_toml(plcurate::pipeline::read_file(args.config_path), cfg);

  if (args.workers) cfg.workers = *args.workers;
  if (args.seed) cfg.seed = *args.seed;
  if (args.confidence_threshold) cfg.confidence_threshold = *args.confidence_threshold;
  if (args.pocket_rmsd_threshold) cfg.pocket_rmsd_threshold = *args.pocket_rmsd_threshold;
  if (args.tanimoto_cutoff) cfg.tanimoto_cutoff = *args.tanimoto_cutoff;
  if (args.hybrid_low) cfg.hybrid_low = *args.hybrid_low;
  if (args.hybrid_high) cfg.hybrid_high = *args.hybrid_high;
  if (args.similarity_bins) cfg.similarity_bins = *args.similarity_bins;
  if (args.compute_plausibility) cfg.compute_plausibility = *args.compute_plausibility;
  if (args.radius_table) cfg.radius_table_path = *args.radius_table;
  if (args.bootstrap_samples) cfg.bootstrap_samples = *args.bootstrap_samples;
  if (args.ci_level) cfg.ci_level = *args.ci_level;
  if (args.min_series_size) cfg.min_series_size = *args.min_series_size;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curation and evaluation toolkit for co-folded protein-ligand predictions"};
  app.require_subcommand(1);

  CommonArgs score_args, triage_args, sankey_args, filter_args, evaluate_args, subsets_args;
  std::string manifest, labels, test_ligands, predictions;
  std::vector<std::size_t> sizes;

  auto* score = app.add_subcommand("score", "parse, match and score manifest entries");
  score->add_option("--manifest", manifest, "input manifest (JSON Lines)")->required();
  add_common_options(score, score_args);

  auto* triage_cmd = app.add_subcommand("triage", "label entries and build the Sankey flows");
  triage_cmd->add_option("--manifest", manifest, "scored manifest (JSON Lines)")->required();
  add_common_options(triage_cmd, triage_args);

  auto* sankey = app.add_subcommand("sankey", "rebuild Sankey reports from labels.csv");
  sankey->add_option("--labels", labels, "labels.csv from the triage command")->required();
  add_common_options(sankey, sankey_args);

  auto* filter = app.add_subcommand("filter", "element gate and test-set leakage filter");
  filter->add_option("--manifest", manifest, "training manifest (JSON Lines)")->required();
  filter->add_option("--test-ligands", test_ligands, "test-set ligands (SDF)")->required();
  add_common_options(filter, filter_args);

  auto* evaluate = app.add_subcommand("evaluate", "weighted benchmark statistics");
  evaluate->add_option("--predictions", predictions, "predictions CSV")->required();
  add_common_options(evaluate, evaluate_args);

  auto* subsets = app.add_subcommand("subsets", "nested random subsets per partition");
  subsets->add_option("--manifest", manifest, "manifest (JSON Lines)")->required();
  subsets->add_option("--sizes", sizes, "ascending subset sizes")->required();
  add_common_options(subsets, subsets_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : plcurate::pipeline::kExitUsage;
  }

  try {
    if (score->parsed())
      return plcurate::pipeline::cmd_score(resolve_config(score_args), manifest,
                                           score_args.out_dir);
    if (triage_cmd->parsed())
      return plcurate::pipeline::cmd_triage(resolve_config(triage_args), manifest,
                                            triage_args.out_dir);
    if (sankey->parsed())
      return plcurate::pipeline::cmd_sankey(resolve_config(sankey_args), labels,
                                            sankey_args.out_dir);
    if (filter->parsed())
      return plcurate::pipeline::cmd_filter(resolve_config(filter_args), manifest, test_ligands,
                                            filter_args.out_dir);
    if (evaluate->parsed())
      return plcurate::pipeline::cmd_evaluate(resolve_config(evaluate_args), predictions,
                                              evaluate_args.out_dir);
    if (subsets->parsed())
      return plcurate::pipeline::cmd_subsets(resolve_config(subsets_args), manifest, sizes,
                                             subsets_args.out_dir);
  } catch (const plcurate::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return plcurate::pipeline::kExitUsage;
  } catch (const plcurate::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return plcurate::pipeline::kExitUsage;
  }
  return plcurate::pipeline::kExitUsage;
}
