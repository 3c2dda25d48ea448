#include "plcurate/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "plcurate/confidence.hpp"
#include "plcurate/plausibility.hpp"
#include "plcurate/quality.hpp"
#include "plcurate/random.hpp"
#include "plcurate/stats.hpp"
#include "plcurate/structio.hpp"
#include "plcurate/triage.hpp"

namespace plcurate::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using triage::ManifestEntry;

namespace {

std::string format_fixed(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

// Results land in per-index slots, so the output is identical for any worker
// count or scheduling order.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
}

struct ErrorRow {
  std::string id;
  std::string stage;
  std::string message;
};

void write_error_rows(std::vector<ErrorRow> rows, const fs::path& path) {
  std::sort(rows.begin(), rows.end(), [](const ErrorRow& a, const ErrorRow& b) {
    return a.id != b.id ? a.id < b.id : a.stage < b.stage;
  });
  std::string out;
  for (const auto& row : rows) {
    ordered_json j;
    j["id"] = row.id;
    j["stage"] = row.stage;
    j["message"] = row.message;
    out += j.dump();
    out += '\n';
  }
  write_file(path.string(), out);
}

std::vector<ManifestEntry> read_manifest_sorted(const std::string& path) {
  auto entries = triage::parse_manifest_jsonl(read_file(path));
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  return entries;
}

plausibility::RadiusTable load_radius_table(const config::PipelineConfig& cfg) {
  if (cfg.radius_table_path.empty()) return plausibility::RadiusTable::builtin();
  return plausibility::RadiusTable::from_csv(read_file(cfg.radius_table_path));
}

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

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// score

namespace {

struct ScoreOutcome {
  std::optional<ManifestEntry> entry;
  std::optional<ErrorRow> error;
};

ScoreOutcome score_entry(const config::PipelineConfig& cfg,
                         const plausibility::RadiusTable& radii, ManifestEntry entry) {
  std::string stage;
  try {
    stage = "prediction";
    structio::ComplexStructure pred = structio::parse_pdb(read_file(entry.pred_path), entry.id);

    stage = "ligand";
    if (!entry.ligand_path.empty()) {
      const auto graphs = structio::parse_sdf(read_file(entry.ligand_path));
      if (graphs.empty()) throw Error("ligand SDF holds no records");
      pred.ligand_graph = graphs.front();  // first record is the ligand
    }

    stage = "chain_class";
    entry.chain_class = structio::classify_chains(pred);

    stage = "confidence";
    if (entry.confidence_path)
      entry.confidence = confidence::load_confidence(read_file(*entry.confidence_path));

    stage = "plddt";
    if (entry.plddt_path) {
      if (!entry.confidence)
        throw Error("pLDDT vector supplied without a confidence record");
      const auto vec = confidence::load_plddt(read_file(*entry.plddt_path), pred);
      const auto sel = geometry::select_pocket_and_shell(pred);
      const auto region = confidence::region_plddt(vec, sel, pred);
      entry.confidence->ligand_plddt = region.ligand;
      entry.confidence->pocket_plddt = region.pocket;
      entry.confidence->shell_plddt = region.shell;
    }

    stage = "plausibility";
    if (cfg.compute_plausibility && pred.ligand_graph) {
      const auto report =
          plausibility::assess(pred, radii, {cfg.bond_tolerance, cfg.clash_factor});
      entry.physical = report.physical;
    }

    stage = "quality";
    if (entry.ref_path) {
      structio::ComplexStructure ref =
          structio::parse_pdb(read_file(*entry.ref_path), entry.id + "_ref");
      ref.ligand_graph = pred.ligand_graph;
      entry.quality = quality::compute_quality(pred, ref);
    }

    return {std::move(entry), std::nullopt};
  } catch (const Error& e) {
    return {std::nullopt, ErrorRow{entry.id, stage, e.what()}};
  } catch (const std::exception& e) {
    return {std::nullopt, ErrorRow{entry.id, stage, std::string("unexpected: ") + e.what()}};
  }
}

}  // namespace

int cmd_score(const config::PipelineConfig& cfg, const std::string& manifest_path,
              const std::string& out_dir) {
  const auto entries = read_manifest_sorted(manifest_path);
  if (entries.empty()) {
    std::cerr << "score: manifest is empty\n";
    return kExitBatchFailure;
  }
  const auto radii = load_radius_table(cfg);

  std::vector<ScoreOutcome> outcomes(entries.size());
  parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
    outcomes[i] = score_entry(cfg, radii, entries[i]);
  });

  std::vector<ManifestEntry> scored;
  std::vector<ErrorRow> errors;
  for (auto& o : outcomes) {
    if (o.entry) scored.push_back(std::move(*o.entry));
    if (o.error) errors.push_back(std::move(*o.error));
  }

  const fs::path dir(out_dir);
  std::ostringstream jsonl;
  triage::write_manifest_jsonl(scored, jsonl);
  write_file((dir / "scored.jsonl").string(), jsonl.str());
  std::ostringstream csv;
  triage::write_manifest_csv(scored, csv);
  write_file((dir / "scored.csv").string(), csv.str());
  write_error_rows(errors, dir / "errors.jsonl");

  std::cerr << "score: " << scored.size() << " scored, " << errors.size() << " failed\n";
  const double failure_share =
      static_cast<double>(errors.size()) / static_cast<double>(entries.size());
  return failure_share > cfg.failure_exit_fraction ? kExitBatchFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// triage + sankey

namespace {

std::string sankey_csv(const std::vector<triage::SankeyFlow>& flows) {
  std::string out = "stage_from,stage_to,count,percent_of_parent,percent_display\n";
  for (const auto& f : flows) {
    out += f.stage_from + ',' + f.stage_to + ',' + std::to_string(f.count) + ',' +
           format_fixed(f.percent_of_parent) + ',' + triage::format_percent(f.percent_of_parent) +
           '\n';
  }
  return out;
}

std::string sankey_json(const std::vector<triage::SankeyFlow>& flows) {
  ordered_json doc;
  doc["flows"] = ordered_json::array();
  for (const auto& f : flows) {
    ordered_json j;
    j["stage_from"] = f.stage_from;
    j["stage_to"] = f.stage_to;
    j["count"] = f.count;
    j["percent_of_parent"] = round6(f.percent_of_parent);
    j["percent_display"] = triage::format_percent(f.percent_of_parent);
    doc["flows"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

std::optional<bool> parse_tristate(const std::string& field, const std::string& context) {
  if (field.empty()) return std::nullopt;
  if (field == "true") return true;
  if (field == "false") return false;
  throw Error(context + ": expected true/false/empty, got '" + field + "'");
}

// Confidence metrics paired against quality metrics for the tau matrix.
std::vector<stats::MetricColumn> confidence_columns(const std::vector<ManifestEntry>& entries) {
  struct Field {
    const char* name;
    std::function<std::optional<double>(const confidence::ConfidenceRecord&)> get;
  };
  const std::vector<Field> fields = {
      {"confidence_score", [](const auto& c) { return std::optional<double>(c.confidence_score); }},
      {"ptm", [](const auto& c) { return c.ptm; }},
      {"iptm", [](const auto& c) { return c.iptm; }},
      {"ligand_iptm", [](const auto& c) { return c.ligand_iptm; }},
      {"protein_iptm", [](const auto& c) { return c.protein_iptm; }},
      {"complex_plddt", [](const auto& c) { return c.complex_plddt; }},
      {"complex_pde", [](const auto& c) { return c.complex_pde; }},
      {"complex_ipde", [](const auto& c) { return c.complex_ipde; }},
      {"ligand_plddt", [](const auto& c) { return c.ligand_plddt; }},
      {"pocket_plddt", [](const auto& c) { return c.pocket_plddt; }},
      {"shell_plddt", [](const auto& c) { return c.shell_plddt; }},
  };
  std::vector<stats::MetricColumn> columns;
  for (const auto& f : fields) {
    stats::MetricColumn col{f.name, {}};
    for (const auto& e : entries)
      col.values.push_back(e.confidence ? f.get(*e.confidence) : std::nullopt);
    columns.push_back(std::move(col));
  }
  return columns;
}

std::vector<stats::MetricColumn> quality_columns(const std::vector<ManifestEntry>& entries) {
  struct Field {
    const char* name;
    std::function<double(const quality::QualityReport&)> get;
  };
  const std::vector<Field> fields = {
      {"complex_rmsd", [](const auto& q) { return q.complex_rmsd; }},
      {"protein_rmsd", [](const auto& q) { return q.protein_rmsd; }},
      {"ligand_rmsd", [](const auto& q) { return q.ligand_rmsd; }},
      {"pocket_rmsd", [](const auto& q) { return q.pocket_rmsd; }},
  };
  std::vector<stats::MetricColumn> columns;
  for (const auto& f : fields) {
    stats::MetricColumn col{f.name, {}};
    for (const auto& e : entries)
      col.values.push_back(e.quality ? std::optional<double>(f.get(*e.quality)) : std::nullopt);
    columns.push_back(std::move(col));
  }
  return columns;
}

}  // namespace

int cmd_triage(const config::PipelineConfig& cfg, const std::string& manifest_path,
               const std::string& out_dir) {
  const auto entries = read_manifest_sorted(manifest_path);
  if (entries.empty()) {
    std::cerr << "triage: manifest is empty\n";
    return kExitBatchFailure;
  }

  const triage::TriageThresholds thresholds{cfg.confidence_threshold, cfg.pocket_rmsd_threshold};
  std::vector<triage::TriageLabel> labels;
  std::vector<const ManifestEntry*> labelled;
  std::vector<ErrorRow> errors;
  std::string labels_csv = "id,single_chain,physical,high_conf,high_quality\n";
  for (const auto& e : entries) {
    try {
      const auto label = triage::triage_entry(e, thresholds);
      labels.push_back(label);
      labelled.push_back(&e);
      labels_csv += csv_escape(e.id) + ',' + (label.single_chain ? "true" : "false") + ',' +
                    (label.physical ? "true" : "false") + ',' +
                    (label.high_conf ? "true" : "false") + ',' +
                    (label.high_quality ? (*label.high_quality ? "true" : "false") : "") + '\n';
    } catch (const Error& err) {
      errors.push_back({e.id, "triage", err.what()});
    }
  }

  const fs::path dir(out_dir);
  write_error_rows(errors, dir / "errors.jsonl");
  if (labels.empty()) {
    std::cerr << "triage: no entry carries the fields needed for triage\n";
    return kExitBatchFailure;
  }
  write_file((dir / "labels.csv").string(), labels_csv);

  const auto flows = triage::build_sankey(labels);
  write_file((dir / "sankey.csv").string(), sankey_csv(flows));
  write_file((dir / "sankey.json").string(), sankey_json(flows));

  // Success rate vs ingested train-test similarity, over entries with quality.
  std::vector<stats::SuccessEntry> success_entries;
  for (const ManifestEntry* e : labelled)
    if (e->quality) success_entries.push_back({e->quality->pocket_rmsd, e->train_test_similarity});
  if (!success_entries.empty()) {
    const auto rates =
        stats::success_rate(success_entries, cfg.pocket_rmsd_threshold, cfg.similarity_bins);
    std::string csv = "bin_low,bin_high,total,successes,rate\n";
    auto row = [&csv](const std::string& lo, const std::string& hi,
                      const stats::SuccessRateBin& bin) {
      csv += lo + ',' + hi + ',' + std::to_string(bin.total) + ',' +
             std::to_string(bin.successes) + ',' + (bin.rate ? format_fixed(*bin.rate) : "") +
             '\n';
    };
    for (const auto& bin : rates.bins) row(format_fixed(bin.low), format_fixed(bin.high), bin);
    row("", "", rates.unbinned);
    write_file((dir / "success_rates.csv").string(), csv);
  }

  // Confidence-quality Kendall tau matrix.
  std::vector<ManifestEntry> labelled_copy;
  for (const ManifestEntry* e : labelled) labelled_copy.push_back(*e);
  if (labelled_copy.size() >= 2) {
    const auto rows = confidence_columns(labelled_copy);
    const auto cols = quality_columns(labelled_copy);
    const auto matrix = stats::correlation_matrix(rows, cols);
    std::string csv = "metric";
    for (const auto& name : matrix.col_names) csv += ',' + name;
    csv += '\n';
    for (std::size_t i = 0; i < matrix.row_names.size(); ++i) {
      csv += matrix.row_names[i];
      for (std::size_t j = 0; j < matrix.col_names.size(); ++j)
        csv += ',' + (matrix.tau[i][j] ? format_fixed(*matrix.tau[i][j]) : std::string());
      csv += '\n';
    }
    write_file((dir / "confidence_quality_tau.csv").string(), csv);
  }

  std::cerr << "triage: " << labels.size() << " labelled, " << errors.size() << " failed\n";
  const double failure_share =
      static_cast<double>(errors.size()) / static_cast<double>(entries.size());
  return failure_share > cfg.failure_exit_fraction ? kExitBatchFailure : kExitOk;
}

int cmd_sankey(const config::PipelineConfig&, const std::string& labels_path,
               const std::string& out_dir) {
  std::istringstream in(read_file(labels_path));
  std::string line;
  if (!std::getline(in, line)) {
    std::cerr << "sankey: labels file is empty\n";
    return kExitBatchFailure;
  }
  const auto header = split_csv_line(line);
  auto column = [&header](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw Error("labels file is missing column '" + name + "'");
  };

  std::vector<triage::TriageLabel> labels;
  try {
    const int c_single = column("single_chain");
    const int c_physical = column("physical");
    const int c_conf = column("high_conf");
    const int c_quality = column("high_quality");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto fields = split_csv_line(line);
      const auto at = [&](int c) -> const std::string& {
        if (static_cast<std::size_t>(c) >= fields.size())
          throw Error("labels line " + std::to_string(line_no) + ": too few columns");
        return fields[c];
      };
      const std::string context = "labels line " + std::to_string(line_no);
      triage::TriageLabel label;
      label.single_chain = parse_tristate(at(c_single), context).value_or(false);
      label.physical = parse_tristate(at(c_physical), context).value_or(false);
      label.high_conf = parse_tristate(at(c_conf), context).value_or(false);
      label.high_quality = parse_tristate(at(c_quality), context);
      labels.push_back(label);
    }
  } catch (const Error& e) {
    std::cerr << "sankey: " << e.what() << '\n';
    return kExitUsage;
  }
  if (labels.empty()) {
    std::cerr << "sankey: no label rows\n";
    return kExitBatchFailure;
  }

  const auto flows = triage::build_sankey(labels);
  const fs::path dir(out_dir);
  write_file((dir / "sankey.csv").string(), sankey_csv(flows));
  write_file((dir / "sankey.json").string(), sankey_json(flows));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// filter

int cmd_filter(const config::PipelineConfig& cfg, const std::string& manifest_path,
               const std::string& test_ligands_path, const std::string& out_dir) {
  const auto entries = read_manifest_sorted(manifest_path);
  if (entries.empty()) {
    std::cerr << "filter: manifest is empty\n";
    return kExitBatchFailure;
  }

  // Test-set fingerprints; record titles name the ligands.
  std::vector<std::pair<std::string, chem::Fingerprint>> test_fps;
  {
    const std::string text = read_file(test_ligands_path);
    const auto graphs = structio::parse_sdf(text);
    const auto titles = structio::sdf_record_titles(text);
    std::set<std::string> seen;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
      std::string name = titles[k].empty() ? "test_" + std::to_string(k) : titles[k];
      while (!seen.insert(name).second) name += "_" + std::to_string(k);
      test_fps.push_back({name, chem::morgan_fingerprint(graphs[k])});
    }
  }

  // Element gate first, over entries with a connection table; entries without
  // one pass through on their stored fingerprint.
  std::vector<ErrorRow> errors;
  std::vector<ManifestEntry> gated;
  std::vector<std::pair<std::string, std::vector<std::string>>> offenders;
  struct Rejected {
    std::string id;
    std::string elements;
  };
  std::vector<Rejected> rejected_rows;
  for (const auto& e : entries) {
    try {
      std::optional<chem::MolecularGraph> graph;
      if (!e.ligand_path.empty()) {
        const auto graphs = structio::parse_sdf(read_file(e.ligand_path));
        if (graphs.empty()) throw Error("ligand SDF holds no records");
        graph = graphs.front();
      }
      ManifestEntry entry = e;
      if (graph) {
        const auto gate = triage::element_gate({entry}, {*graph});
        if (!gate.kept.empty()) {
          if (!entry.fingerprint) entry.fingerprint = chem::morgan_fingerprint(*graph);
          gated.push_back(std::move(entry));
        } else {
          std::string joined;
          for (const auto& el : gate.offenders[0].second)
            joined += (joined.empty() ? "" : ";") + el;
          rejected_rows.push_back({entry.id, joined});
        }
      } else if (entry.fingerprint) {
        gated.push_back(std::move(entry));
      } else {
        throw triage::MissingFingerprint("no ligand file and no stored fingerprint");
      }
    } catch (const Error& err) {
      errors.push_back({e.id, "filter", err.what()});
    }
  }

  const auto result = triage::leakage_filter(gated, test_fps, cfg.tanimoto_cutoff);

  const fs::path dir(out_dir);
  std::ostringstream kept;
  triage::write_manifest_jsonl(result.kept, kept);
  write_file((dir / "kept.jsonl").string(), kept.str());
  std::ostringstream removed;
  triage::write_manifest_jsonl(result.removed, removed);
  write_file((dir / "removed.jsonl").string(), removed.str());

  std::string rejected_csv = "id,offending_elements\n";
  for (const auto& r : rejected_rows) rejected_csv += csv_escape(r.id) + ',' + r.elements + '\n';
  write_file((dir / "rejected.csv").string(), rejected_csv);

  std::string audit = "id,max_similarity,nearest_test_id,removed\n";
  for (const auto& row : result.audit)
    audit += csv_escape(row.id) + ',' + format_fixed(row.max_similarity) + ',' +
             csv_escape(row.nearest_test_id) + ',' + (row.removed ? "true" : "false") + '\n';
  write_file((dir / "audit.csv").string(), audit);
  write_error_rows(errors, dir / "errors.jsonl");

  std::cerr << "filter: " << result.kept.size() << " kept, " << result.removed.size()
            << " removed by similarity, " << rejected_rows.size() << " rejected by element, "
            << errors.size() << " failed\n";
  const double failure_share =
      static_cast<double>(errors.size()) / static_cast<double>(entries.size());
  return failure_share > cfg.failure_exit_fraction ? kExitBatchFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const config::PipelineConfig& cfg, const std::string& predictions_path,
                 const std::string& out_dir) {
  std::vector<stats::Series> series;
  try {
    series = stats::load_series_csv(read_file(predictions_path));
  } catch (const Error& e) {
    std::cerr << "evaluate: " << e.what() << '\n';
    return kExitUsage;
  }

  stats::AggregateResult result;
  try {
    result = stats::evaluate_benchmark(series, static_cast<std::size_t>(cfg.min_series_size),
                                       cfg.bootstrap_samples, cfg.ci_level, cfg.seed);
  } catch (const stats::NoEligibleSeries& e) {
    std::cerr << "evaluate: " << e.what() << '\n';
    return kExitBatchFailure;
  }

  const fs::path dir(out_dir);
  ordered_json j;
  j["weighted_pcc"] = round6(result.weighted_pcc);
  j["pcc_ci_low"] = round6(result.pcc_ci.low);
  j["pcc_ci_high"] = round6(result.pcc_ci.high);
  j["weighted_tau"] = round6(result.weighted_tau);
  j["tau_ci_low"] = round6(result.tau_ci.low);
  j["tau_ci_high"] = round6(result.tau_ci.high);
  j["series_used"] = result.series_used;
  j["min_series_size"] = cfg.min_series_size;
  j["bootstrap_samples"] = cfg.bootstrap_samples;
  j["ci_level"] = round6(cfg.ci_level);
  j["seed"] = cfg.seed;
  write_file((dir / "aggregate.json").string(), j.dump(2) + "\n");

  std::vector<const stats::Series*> sorted;
  for (const auto& s : series) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const stats::Series* a, const stats::Series* b) { return a->name < b->name; });
  std::string csv = "series,size,pearson,kendall_tau\n";
  for (const stats::Series* s : sorted) {
    std::string pcc, tau;
    try {
      pcc = format_fixed(stats::series_metric(*s, stats::Metric::Pearson));
    } catch (const Error&) {
    }
    try {
      tau = format_fixed(stats::series_metric(*s, stats::Metric::KendallTau));
    } catch (const Error&) {
    }
    csv += csv_escape(s->name) + ',' + std::to_string(s->pairs.size()) + ',' + pcc + ',' + tau +
           '\n';
  }
  write_file((dir / "per_series.csv").string(), csv);

  std::cerr << "evaluate: " << result.series_used << " series, weighted PCC "
            << format_fixed(result.weighted_pcc) << ", weighted tau "
            << format_fixed(result.weighted_tau) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// subsets

int cmd_subsets(const config::PipelineConfig& cfg, const std::string& manifest_path,
                const std::vector<std::size_t>& sizes, const std::string& out_dir) {
  const auto entries = read_manifest_sorted(manifest_path);
  if (entries.empty()) {
    std::cerr << "subsets: manifest is empty\n";
    return kExitBatchFailure;
  }
  if (sizes.empty()) {
    std::cerr << "subsets: no sizes requested\n";
    return kExitUsage;
  }

  // Partition by hybrid score when every entry carries one, otherwise a
  // single pool.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> partitions;
  const bool all_have_hybrid =
      std::all_of(entries.begin(), entries.end(),
                  [](const ManifestEntry& e) { return e.confidence && e.confidence->hybrid_score; });
  if (all_have_hybrid) {
    const auto map = triage::partition_by_hybrid(entries, {cfg.hybrid_low, cfg.hybrid_high});
    partitions = {{"high", map.high}, {"moderate", map.moderate}, {"low", map.low}};
  } else {
    std::vector<std::size_t> all(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) all[i] = i;
    partitions = {{"all", std::move(all)}};
  }

  const fs::path dir(out_dir);
  ordered_json summary;
  const std::uint64_t stream_base = SplitMix64(cfg.seed).next();
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    const auto& [name, indices] = partitions[p];
    std::vector<std::size_t> usable, skipped;
    for (const std::size_t s : sizes)
      (s <= indices.size() ? usable : skipped).push_back(s);

    ordered_json part;
    part["population"] = indices.size();
    part["sizes_written"] = usable;
    part["sizes_skipped"] = skipped;
    summary[name] = part;

    if (usable.empty()) continue;
    const auto subsets = triage::nested_subsets(indices.size(), usable, stream_base + p);
    for (std::size_t k = 0; k < subsets.size(); ++k) {
      std::vector<ManifestEntry> subset;
      subset.reserve(subsets[k].size());
      for (const std::size_t local : subsets[k]) subset.push_back(entries[indices[local]]);
      std::ostringstream jsonl;
      triage::write_manifest_jsonl(subset, jsonl);
      char filename[64];
      std::snprintf(filename, sizeof filename, "subset_%02zu_size_%zu.jsonl", k, usable[k]);
      write_file((dir / name / filename).string(), jsonl.str());
    }
  }
  write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  return kExitOk;
}

}  // namespace plcurate::pipeline
