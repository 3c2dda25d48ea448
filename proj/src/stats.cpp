#include "plcurate/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "plcurate/random.hpp"

namespace plcurate::stats {

double dg_to_pk(double dg_kcal_per_mol, const ThermoConstants& constants) {
  const double ln10 = 2.302585092994046;
  return -dg_kcal_per_mol / (ln10 * constants.gas_constant_kcal * constants.temperature_k);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InsufficientData("input vectors differ in length");
  const std::size_t n = xs.size();
  if (n < 2) throw InsufficientData("Pearson correlation needs at least 2 points");

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0.0 || vy == 0.0) throw ConstantInput("an input vector is constant");
  return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
}

namespace {

// Inversions of `values` counted with an iterative merge sort; ties do not
// count as inversions.
std::uint64_t count_inversions(std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> buffer(n);
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (values[j] < values[i]) {
          inversions += mid - i;
          buffer[k++] = values[j++];
        } else {
          buffer[k++] = values[i++];
        }
      }
      while (i < mid) buffer[k++] = values[i++];
      while (j < hi) buffer[k++] = values[j++];
      std::copy(buffer.begin() + lo, buffer.begin() + hi, values.begin() + lo);
    }
  }
  return inversions;
}

std::uint64_t tie_pairs(std::uint64_t run_length) { return run_length * (run_length - 1) / 2; }

}  // namespace

double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InsufficientData("input vectors differ in length");
  const std::size_t n = xs.size();
  if (n < 2) throw InsufficientData("Kendall tau needs at least 2 points");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (xs[a] != xs[b]) return xs[a] < xs[b];
    return ys[a] < ys[b];
  });

  std::uint64_t xtie = 0, joint_tie = 0;
  {
    std::size_t run_x = 1, run_xy = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if (xs[idx[i]] == xs[idx[i - 1]]) {
        ++run_x;
        if (ys[idx[i]] == ys[idx[i - 1]])
          ++run_xy;
        else {
          joint_tie += tie_pairs(run_xy);
          run_xy = 1;
        }
      } else {
        xtie += tie_pairs(run_x);
        joint_tie += tie_pairs(run_xy);
        run_x = run_xy = 1;
      }
    }
    xtie += tie_pairs(run_x);
    joint_tie += tie_pairs(run_xy);
  }

  std::uint64_t ytie = 0;
  {
    std::vector<double> sorted_y(ys.begin(), ys.end());
    std::sort(sorted_y.begin(), sorted_y.end());
    std::size_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if (sorted_y[i] == sorted_y[i - 1])
        ++run;
      else {
        ytie += tie_pairs(run);
        run = 1;
      }
    }
    ytie += tie_pairs(run);
  }

  std::vector<double> y_in_x_order(n);
  for (std::size_t i = 0; i < n; ++i) y_in_x_order[i] = ys[idx[i]];
  const std::uint64_t discordant = count_inversions(y_in_x_order);

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (total == xtie || total == ytie) throw AllTied("an input vector is entirely tied");

  const double con_minus_dis = static_cast<double>(total) - static_cast<double>(xtie) -
                               static_cast<double>(ytie) + static_cast<double>(joint_tie) -
                               2.0 * static_cast<double>(discordant);
  const double denom = std::sqrt(static_cast<double>(total - xtie) *
                                 static_cast<double>(total - ytie));
  return std::clamp(con_minus_dis / denom, -1.0, 1.0);
}

double series_metric(const Series& s, Metric metric) {
  std::vector<double> xs, ys;
  xs.reserve(s.pairs.size());
  ys.reserve(s.pairs.size());
  for (const auto& [pred, exp] : s.pairs) {
    xs.push_back(pred);
    ys.push_back(exp);
  }
  return metric == Metric::Pearson ? pearson(xs, ys) : kendall_tau(xs, ys);
}

namespace {

struct SizedValue {
  std::size_t size;
  double value;
};

double weighted_mean(const std::vector<SizedValue>& values) {
  double num = 0, den = 0;
  for (const auto& v : values) {
    num += static_cast<double>(v.size) * v.value;
    den += static_cast<double>(v.size);
  }
  return num / den;
}

}  // namespace

double weighted_aggregate(std::span<const Series> series, Metric metric, std::size_t min_size) {
  std::vector<SizedValue> values;
  for (const auto& s : series) {
    if (s.pairs.size() < min_size) continue;
    try {
      values.push_back({s.pairs.size(), series_metric(s, metric)});
    } catch (const ConstantInput&) {
    } catch (const AllTied&) {
    }
  }
  if (values.empty())
    throw NoEligibleSeries("no series with at least " + std::to_string(min_size) +
                           " ligands and a defined metric");
  return weighted_mean(values);
}

double weighted_aggregate(std::span<const std::pair<std::size_t, double>> sized_metrics,
                          std::size_t min_size) {
  std::vector<SizedValue> values;
  for (const auto& [size, value] : sized_metrics)
    if (size >= min_size) values.push_back({size, value});
  if (values.empty())
    throw NoEligibleSeries("no series with at least " + std::to_string(min_size) + " ligands");
  return weighted_mean(values);
}

BootstrapInterval bootstrap_ci(std::span<const Series> series, Metric metric, int n_boot,
                               double level, std::uint64_t seed, std::size_t min_size) {
  std::vector<const Series*> eligible;
  for (const auto& s : series)
    if (s.pairs.size() >= min_size) eligible.push_back(&s);
  if (eligible.empty()) throw NoEligibleSeries("no series meets the minimum size");

  // One mixing step decorrelates nearby master seeds before the per-replicate
  // offset is applied.
  const std::uint64_t stream_base = SplitMix64(seed).next();

  std::vector<double> replicates;
  replicates.reserve(n_boot);
  Series resampled;
  for (int b = 0; b < n_boot; ++b) {
    SplitMix64 rng(stream_base + static_cast<std::uint64_t>(b));
    std::vector<SizedValue> values;
    for (const Series* s : eligible) {
      const std::size_t n = s->pairs.size();
      resampled.pairs.clear();
      for (std::size_t k = 0; k < n; ++k) resampled.pairs.push_back(s->pairs[rng.bounded(n)]);
      try {
        values.push_back({n, series_metric(resampled, metric)});
      } catch (const ConstantInput&) {
      } catch (const AllTied&) {
      }
    }
    if (!values.empty()) replicates.push_back(weighted_mean(values));
  }
  if (replicates.empty()) throw NoEligibleSeries("every bootstrap replicate was degenerate");

  std::sort(replicates.begin(), replicates.end());
  auto percentile = [&replicates](double q) {
    const double pos = q * static_cast<double>(replicates.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= replicates.size()) return replicates.back();
    return replicates[lo] + frac * (replicates[lo + 1] - replicates[lo]);
  };
  const double alpha = (1.0 - level) / 2.0;
  return {percentile(alpha), percentile(1.0 - alpha)};
}

AggregateResult evaluate_benchmark(std::span<const Series> series, std::size_t min_size,
                                   int n_boot, double level, std::uint64_t seed) {
  AggregateResult result;
  result.weighted_pcc = weighted_aggregate(series, Metric::Pearson, min_size);
  result.weighted_tau = weighted_aggregate(series, Metric::KendallTau, min_size);
  for (const auto& s : series)
    if (s.pairs.size() >= min_size) ++result.series_used;
  result.pcc_ci = bootstrap_ci(series, Metric::Pearson, n_boot, level, seed, min_size);
  result.tau_ci = bootstrap_ci(series, Metric::KendallTau, n_boot, level, seed, min_size);
  return result;
}

// ---------------------------------------------------------------------------
// Series CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace

std::vector<Series> load_series_csv(std::string_view text, const ThermoConstants& constants) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error("series CSV is empty");

  const auto header = split_csv_line(line);
  auto column = [&header](std::string_view name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int series_col = column("series");
  if (series_col < 0) throw Error("series CSV is missing a 'series' column");
  const int pred_pk_col = column("pred_pk");
  const int pred_dg_col = column("pred_dg");
  const int exp_pk_col = column("exp_pk");
  const int exp_dg_col = column("exp_dg");
  if (pred_pk_col < 0 && pred_dg_col < 0)
    throw Error("series CSV needs a pred_pk or pred_dg column");
  if (exp_pk_col < 0 && exp_dg_col < 0) throw Error("series CSV needs an exp_pk or exp_dg column");

  std::vector<Series> out;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    auto value_at = [&](int col) {
      if (col < 0 || static_cast<std::size_t>(col) >= fields.size())
        throw Error("series CSV line " + std::to_string(line_no) + ": missing column");
      try {
        std::size_t used = 0;
        const double v = std::stod(fields[col], &used);
        if (used != fields[col].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw Error("series CSV line " + std::to_string(line_no) + ": cannot parse '" +
                    fields[col] + "'");
      }
    };
    const double pred =
        pred_pk_col >= 0 ? value_at(pred_pk_col) : dg_to_pk(value_at(pred_dg_col), constants);
    const double exp =
        exp_pk_col >= 0 ? value_at(exp_pk_col) : dg_to_pk(value_at(exp_dg_col), constants);
    if (!std::isfinite(pred) || !std::isfinite(exp))
      throw Error("series CSV line " + std::to_string(line_no) + ": non-finite value");

    const std::string& name = fields[series_col];
    auto it = index.find(name);
    if (it == index.end()) {
      it = index.emplace(name, out.size()).first;
      out.push_back({name, {}});
    }
    out[it->second].pairs.push_back({pred, exp});
  }
  return out;
}

// ---------------------------------------------------------------------------

SuccessRates success_rate(std::span<const SuccessEntry> entries, double threshold,
                          std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) throw Error("need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i)
    if (bin_edges[i] <= bin_edges[i - 1]) throw Error("bin edges must be strictly ascending");

  SuccessRates rates;
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i)
    rates.bins.push_back({bin_edges[i], bin_edges[i + 1], 0, 0, std::nullopt});

  auto tally = [threshold](SuccessRateBin& bin, double rmsd) {
    ++bin.total;
    if (rmsd < threshold) ++bin.successes;
  };
  for (const auto& e : entries) {
    if (!e.train_test_similarity) {
      tally(rates.unbinned, e.pocket_rmsd);
      continue;
    }
    const double s = *e.train_test_similarity;
    bool placed = false;
    for (std::size_t i = 0; i < rates.bins.size(); ++i) {
      const bool last = i + 1 == rates.bins.size();
      if (s >= rates.bins[i].low && (s < rates.bins[i].high || (last && s == rates.bins[i].high))) {
        tally(rates.bins[i], e.pocket_rmsd);
        placed = true;
        break;
      }
    }
    if (!placed) tally(rates.unbinned, e.pocket_rmsd);  // outside the edge range
  }

  auto finalize = [](SuccessRateBin& bin) {
    if (bin.total > 0)
      bin.rate = static_cast<double>(bin.successes) / static_cast<double>(bin.total);
  };
  for (auto& bin : rates.bins) finalize(bin);
  finalize(rates.unbinned);
  return rates;
}

CorrelationMatrix correlation_matrix(std::span<const MetricColumn> rows,
                                     std::span<const MetricColumn> cols) {
  std::size_t n_records = 0;
  for (const auto& c : rows) n_records = std::max(n_records, c.values.size());
  for (const auto& c : cols) n_records = std::max(n_records, c.values.size());
  for (const auto& c : rows)
    if (c.values.size() != n_records) throw Error("metric columns differ in length");
  for (const auto& c : cols)
    if (c.values.size() != n_records) throw Error("metric columns differ in length");
  if (n_records < 2) throw InsufficientData("need at least 2 records");

  CorrelationMatrix m;
  for (const auto& r : rows) m.row_names.push_back(r.name);
  for (const auto& c : cols) m.col_names.push_back(c.name);
  m.tau.assign(rows.size(), std::vector<std::optional<double>>(cols.size()));

  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::vector<double> xs, ys;
      for (std::size_t k = 0; k < n_records; ++k) {
        if (!rows[i].values[k] || !cols[j].values[k]) continue;  // pairwise deletion
        xs.push_back(*rows[i].values[k]);
        ys.push_back(*cols[j].values[k]);
      }
      if (xs.size() < 2) continue;
      try {
        m.tau[i][j] = kendall_tau(xs, ys);
      } catch (const AllTied&) {
      }
    }
  }
  return m;
}

}  // namespace plcurate::stats
