#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plcurate/errors.hpp"

namespace plcurate::stats {

struct InsufficientData : Error {
  using Error::Error;
};
struct ConstantInput : Error {
  using Error::Error;
};
struct AllTied : Error {
  using Error::Error;
};
struct NoEligibleSeries : Error {
  using Error::Error;
};

struct ThermoConstants {
  double gas_constant_kcal = 1.987e-3;  // kcal K^-1 mol^-1
  double temperature_k = 297.0;
};

// dG = -ln(10) R T pK, solved for pK.
double dg_to_pk(double dg_kcal_per_mol, const ThermoConstants& constants = {});

double pearson(std::span<const double> xs, std::span<const double> ys);

// Kendall tau-b (tie corrected), O(n log n) via merge-sort inversion
// counting. The unit tests pit it against a quadratic pair-counting oracle.
double kendall_tau(std::span<const double> xs, std::span<const double> ys);

enum class Metric { Pearson, KendallTau };

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> pairs;  // (predicted pK, experimental pK)
};

double series_metric(const Series& s, Metric metric);

// Size-weighted mean of the per-series metric over series with at least
// min_size ligands. Series whose metric is undefined (constant or all-tied
// input) are skipped.
double weighted_aggregate(std::span<const Series> series, Metric metric,
                          std::size_t min_size = 10);

// Same aggregation over precomputed (series size, metric value) pairs.
double weighted_aggregate(std::span<const std::pair<std::size_t, double>> sized_metrics,
                          std::size_t min_size = 10);

struct BootstrapInterval {
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap: pairs are resampled with replacement within each
// eligible series and the weighted aggregate recomputed per replicate.
// Replicate r draws from SplitMix64(mix(seed) + r), so results are
// reproducible and independent of any parallel scheduling.
BootstrapInterval bootstrap_ci(std::span<const Series> series, Metric metric, int n_boot = 10000,
                               double level = 0.95, std::uint64_t seed = 0,
                               std::size_t min_size = 10);

struct AggregateResult {
  double weighted_pcc = 0.0;
  double weighted_tau = 0.0;
  std::size_t series_used = 0;
  BootstrapInterval pcc_ci;
  BootstrapInterval tau_ci;
};

AggregateResult evaluate_benchmark(std::span<const Series> series, std::size_t min_size = 10,
                                   int n_boot = 10000, double level = 0.95,
                                   std::uint64_t seed = 0);

// CSV with columns: series, ligand_id, pred_pk (or pred_dg), exp_pk (or
// exp_dg). Free-energy columns are converted to pK on load.
std::vector<Series> load_series_csv(std::string_view text,
                                    const ThermoConstants& constants = {});

struct SuccessEntry {
  double pocket_rmsd = 0.0;
  std::optional<double> train_test_similarity;
};

struct SuccessRateBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t total = 0;
  std::size_t successes = 0;
  std::optional<double> rate;  // absent when the bin is empty
};

struct SuccessRates {
  std::vector<SuccessRateBin> bins;
  SuccessRateBin unbinned;  // entries without a similarity value
};

// Fraction of entries with pocket RMSD strictly below the threshold, per
// train-test-similarity bin. Bins are [e0,e1), ..., last bin closed.
SuccessRates success_rate(std::span<const SuccessEntry> entries, double threshold,
                          std::span<const double> bin_edges);

struct MetricColumn {
  std::string name;
  std::vector<std::optional<double>> values;
};

struct CorrelationMatrix {
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  std::vector<std::vector<std::optional<double>>> tau;  // [row][col]
};

// Kendall tau between every (row metric, column metric) pair with pairwise
// deletion of missing values; cells with fewer than two complete pairs or a
// fully tied margin are absent.
CorrelationMatrix correlation_matrix(std::span<const MetricColumn> rows,
                                     std::span<const MetricColumn> cols);

}  // namespace plcurate::stats
