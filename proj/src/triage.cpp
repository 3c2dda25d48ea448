#include "plcurate/triage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "plcurate/random.hpp"

namespace plcurate::triage {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double round6(double v) { return std::round(v * 1e6) / 1e6; }

void round_numbers(ordered_json& j) {
  if (j.is_number_float()) {
    j = round6(j.get<double>());
  } else if (j.is_object() || j.is_array()) {
    for (auto& item : j) round_numbers(item);
  }
}

ordered_json quality_to_json(const quality::QualityReport& q) {
  ordered_json j;
  j["complex_rmsd"] = q.complex_rmsd;
  j["protein_rmsd"] = q.protein_rmsd;
  j["ligand_rmsd"] = q.ligand_rmsd;
  j["pocket_rmsd"] = q.pocket_rmsd;
  j["pocket_size"] = q.pocket_size;
  j["matching_coverage"] = q.matching_coverage;
  j["symmetry_corrected"] = q.symmetry_corrected;
  return j;
}

quality::QualityReport quality_from_json(const json& j) {
  quality::QualityReport q;
  q.complex_rmsd = j.at("complex_rmsd").get<double>();
  q.protein_rmsd = j.at("protein_rmsd").get<double>();
  q.ligand_rmsd = j.at("ligand_rmsd").get<double>();
  q.pocket_rmsd = j.at("pocket_rmsd").get<double>();
  q.pocket_size = j.value("pocket_size", std::size_t{0});
  q.matching_coverage = j.value("matching_coverage", 0.0);
  q.symmetry_corrected = j.value("symmetry_corrected", false);
  return q;
}

}  // namespace

TriageLabel triage_entry(const ManifestEntry& e, const TriageThresholds& thresholds) {
  std::vector<std::string> missing;
  if (!e.chain_class) missing.push_back("chain_class");
  if (!e.physical) missing.push_back("physical");
  if (!e.confidence) missing.push_back("confidence");
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw MissingField("entry '" + e.id + "' is missing: " + names);
  }

  TriageLabel label;
  label.single_chain = *e.chain_class == structio::ChainClass::SingleChain;
  label.physical = *e.physical;
  label.high_conf = e.confidence->confidence_score > thresholds.confidence;
  if (e.quality) label.high_quality = e.quality->pocket_rmsd < thresholds.pocket_rmsd;
  return label;
}

std::vector<SankeyFlow> build_sankey(const std::vector<TriageLabel>& labels) {
  if (labels.empty()) throw EmptyInput("no triage labels to aggregate");

  const std::size_t all = labels.size();
  std::size_t single = 0, physical = 0, high_conf = 0;
  std::size_t high_quality = 0, low_quality = 0, unassessed = 0;
  for (const auto& l : labels) {
    if (!l.single_chain) continue;
    ++single;
    if (!l.physical) continue;
    ++physical;
    if (!l.high_conf) continue;
    ++high_conf;
    if (!l.high_quality.has_value())
      ++unassessed;
    else if (*l.high_quality)
      ++high_quality;
    else
      ++low_quality;
  }

  auto ratio = [](std::size_t count, std::size_t parent) {
    return parent == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(parent);
  };
  std::vector<SankeyFlow> flows;
  auto add = [&](const char* from, const char* to, std::size_t count, std::size_t parent) {
    flows.push_back({from, to, count, ratio(count, parent)});
  };
  add("All", "Single-chain", single, all);
  add("All", "Multi-chain", all - single, all);
  add("Single-chain", "Physical", physical, single);
  add("Single-chain", "Non-physical", single - physical, single);
  add("Physical", "High-conf", high_conf, physical);
  add("Physical", "Low-conf", physical - high_conf, physical);
  add("High-conf", "High-quality", high_quality, high_conf);
  add("High-conf", "Low-quality", low_quality, high_conf);
  add("High-conf", "Unassessed", unassessed, high_conf);
  return flows;
}

std::string format_percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", ratio * 100.0);
  return buf;
}

PartitionMap partition_by_hybrid(const std::vector<ManifestEntry>& entries,
                                 const PartitionThresholds& thresholds) {
  PartitionMap map;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!e.confidence || !e.confidence->hybrid_score)
      throw MissingField("entry '" + e.id + "' has no hybrid score");
    const double score = *e.confidence->hybrid_score;
    if (score > thresholds.high)
      map.high.push_back(i);
    else if (score < thresholds.low)
      map.low.push_back(i);
    else
      map.moderate.push_back(i);  // boundary values are moderate
  }
  return map;
}

std::vector<std::vector<std::size_t>> nested_subsets(std::size_t population,
                                                     const std::vector<std::size_t>& sizes,
                                                     std::uint64_t seed) {
  for (std::size_t k = 1; k < sizes.size(); ++k)
    if (sizes[k] < sizes[k - 1]) throw Error("subset sizes must be ascending");
  if (!sizes.empty() && sizes.back() > population)
    throw SizeExceedsPopulation("subset size " + std::to_string(sizes.back()) +
                                " exceeds population " + std::to_string(population));

  std::vector<std::size_t> order(population);
  for (std::size_t i = 0; i < population; ++i) order[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = population; i > 1; --i)
    std::swap(order[i - 1], order[rng.bounded(i)]);

  std::vector<std::vector<std::size_t>> subsets;
  subsets.reserve(sizes.size());
  for (const std::size_t size : sizes)
    subsets.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
  return subsets;
}

LeakageResult leakage_filter(const std::vector<ManifestEntry>& train,
                             const std::vector<std::pair<std::string, chem::Fingerprint>>& test,
                             double cutoff) {
  LeakageResult result;
  for (const auto& entry : train) {
    if (!entry.fingerprint)
      throw MissingFingerprint("entry '" + entry.id + "' has no fingerprint");
    LeakageAuditRow row;
    row.id = entry.id;
    bool first = true;
    for (const auto& [test_id, fp] : test) {
      const double sim = chem::tanimoto(*entry.fingerprint, fp);
      if (first || sim > row.max_similarity) {
        row.max_similarity = sim;
        row.nearest_test_id = test_id;  // ties keep the first test ligand
        first = false;
      }
    }
    row.removed = row.max_similarity > cutoff;  // strict boundary
    (row.removed ? result.removed : result.kept).push_back(entry);
    result.audit.push_back(std::move(row));
  }
  return result;
}

ElementGateResult element_gate(const std::vector<ManifestEntry>& entries,
                               const std::vector<chem::MolecularGraph>& graphs) {
  if (entries.size() != graphs.size())
    throw Error("element gate needs one ligand graph per entry");
  ElementGateResult result;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto check = chem::element_whitelist_check(graphs[i]);
    if (check.pass) {
      result.kept.push_back(entries[i]);
    } else {
      result.rejected.push_back(entries[i]);
      result.offenders.push_back({entries[i].id, check.offenders});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Manifest I/O

ManifestEntry entry_from_json(const json& j) {
  if (!j.is_object()) throw ManifestError("manifest line is not a JSON object");
  ManifestEntry e;
  if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty())
    throw ManifestError("manifest entry without a usable 'id'");
  e.id = j.at("id").get<std::string>();
  e.pred_path = j.value("pred_path", std::string());
  if (j.contains("ref_path")) e.ref_path = j.at("ref_path").get<std::string>();
  e.ligand_path = j.value("ligand_path", std::string());
  if (j.contains("confidence_path")) e.confidence_path = j.at("confidence_path").get<std::string>();
  if (j.contains("plddt_path")) e.plddt_path = j.at("plddt_path").get<std::string>();
  if (j.contains("affinity_pk")) {
    if (!j.at("affinity_pk").is_number())
      throw ManifestError("entry '" + e.id + "': affinity_pk is not a number");
    e.affinity_pk = j.at("affinity_pk").get<double>();
    if (!std::isfinite(*e.affinity_pk))
      throw ManifestError("entry '" + e.id + "': affinity_pk is not finite");
  }
  if (j.contains("chain_class")) {
    const auto c = structio::chain_class_from_string(j.at("chain_class").get<std::string>());
    if (!c) throw ManifestError("entry '" + e.id + "': unknown chain_class");
    e.chain_class = c;
  }
  if (j.contains("confidence")) e.confidence = confidence::confidence_from_json(j.at("confidence"));
  if (j.contains("quality")) e.quality = quality_from_json(j.at("quality"));
  if (j.contains("physical")) e.physical = j.at("physical").get<bool>();
  if (j.contains("train_test_similarity")) {
    e.train_test_similarity = j.at("train_test_similarity").get<double>();
    if (*e.train_test_similarity < 0.0 || *e.train_test_similarity > 1.0)
      throw ManifestError("entry '" + e.id + "': train_test_similarity outside [0, 1]");
  }
  if (j.contains("fingerprint"))
    e.fingerprint = chem::Fingerprint::from_hex(j.at("fingerprint").get<std::string>());
  return e;
}

ordered_json entry_to_json(const ManifestEntry& e) {
  ordered_json j;
  j["id"] = e.id;
  if (!e.pred_path.empty()) j["pred_path"] = e.pred_path;
  if (e.ref_path) j["ref_path"] = *e.ref_path;
  if (!e.ligand_path.empty()) j["ligand_path"] = e.ligand_path;
  if (e.confidence_path) j["confidence_path"] = *e.confidence_path;
  if (e.plddt_path) j["plddt_path"] = *e.plddt_path;
  if (e.affinity_pk) j["affinity_pk"] = *e.affinity_pk;
  if (e.chain_class) j["chain_class"] = structio::to_string(*e.chain_class);
  if (e.confidence) j["confidence"] = confidence::confidence_to_json(*e.confidence);
  if (e.quality) j["quality"] = quality_to_json(*e.quality);
  if (e.physical) j["physical"] = *e.physical;
  if (e.train_test_similarity) j["train_test_similarity"] = *e.train_test_similarity;
  if (e.fingerprint) j["fingerprint"] = e.fingerprint->to_hex();
  round_numbers(j);
  return j;
}

std::vector<ManifestEntry> parse_manifest_jsonl(std::string_view text) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(start) : text.substr(start, nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ManifestError("manifest line " + std::to_string(line_no) + " is not valid JSON");
    ManifestEntry e = entry_from_json(j);
    if (!ids.insert(e.id).second)
      throw ManifestError("duplicate manifest id '" + e.id + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> read_manifest_jsonl(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest_jsonl(buffer.str());
}

namespace {

std::vector<const ManifestEntry*> sorted_by_id(const std::vector<ManifestEntry>& entries) {
  std::vector<const ManifestEntry*> ptrs;
  ptrs.reserve(entries.size());
  for (const auto& e : entries) ptrs.push_back(&e);
  std::sort(ptrs.begin(), ptrs.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) { return a->id < b->id; });
  return ptrs;
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

std::string format_fixed(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_manifest_jsonl(const std::vector<ManifestEntry>& entries, std::ostream& out) {
  for (const ManifestEntry* e : sorted_by_id(entries)) out << entry_to_json(*e).dump() << '\n';
}

void write_manifest_csv(const std::vector<ManifestEntry>& entries, std::ostream& out) {
  static const char* confidence_fields[] = {
      "confidence_score", "ptm",           "iptm",         "ligand_iptm", "protein_iptm",
      "complex_plddt",    "complex_pde",   "complex_ipde", "ligand_plddt", "pocket_plddt",
      "shell_plddt",      "hybrid_score",  "dope_score"};
  static const char* quality_fields[] = {"complex_rmsd",      "protein_rmsd", "ligand_rmsd",
                                         "pocket_rmsd",       "pocket_size",  "matching_coverage",
                                         "symmetry_corrected"};

  out << "id,pred_path,ref_path,ligand_path,affinity_pk,chain_class,physical,"
         "train_test_similarity";
  for (const char* f : confidence_fields) out << ',' << f;
  for (const char* f : quality_fields) out << ',' << f;
  out << ",fingerprint\n";

  for (const ManifestEntry* ep : sorted_by_id(entries)) {
    const ManifestEntry& e = *ep;
    out << csv_escape(e.id) << ',' << csv_escape(e.pred_path) << ','
        << csv_escape(e.ref_path.value_or("")) << ',' << csv_escape(e.ligand_path) << ','
        << (e.affinity_pk ? format_fixed(*e.affinity_pk) : "") << ','
        << (e.chain_class ? structio::to_string(*e.chain_class) : "") << ','
        << (e.physical ? (*e.physical ? "true" : "false") : "") << ','
        << (e.train_test_similarity ? format_fixed(*e.train_test_similarity) : "");

    const auto conf = e.confidence ? confidence::confidence_to_json(*e.confidence)
                                   : nlohmann::ordered_json::object();
    for (const char* f : confidence_fields) {
      out << ',';
      if (conf.contains(f)) out << format_fixed(conf[f].get<double>());
    }
    if (e.quality) {
      const auto& q = *e.quality;
      out << ',' << format_fixed(q.complex_rmsd) << ',' << format_fixed(q.protein_rmsd) << ','
          << format_fixed(q.ligand_rmsd) << ',' << format_fixed(q.pocket_rmsd) << ','
          << q.pocket_size << ',' << format_fixed(q.matching_coverage) << ','
          << (q.symmetry_corrected ? "true" : "false");
    } else {
      for (std::size_t k = 0; k < std::size(quality_fields); ++k) out << ',';
    }
    out << ',' << (e.fingerprint ? e.fingerprint->to_hex() : "") << '\n';
  }
}

}  // namespace plcurate::triage
