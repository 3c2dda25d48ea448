#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcurate/chem.hpp"
#include "plcurate/confidence.hpp"
#include "plcurate/quality.hpp"
#include "plcurate/structio.hpp"

namespace plcurate::triage {

struct MissingField : Error {
  using Error::Error;
};
struct MissingFingerprint : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};
struct SizeExceedsPopulation : Error {
  using Error::Error;
};
struct ManifestError : Error {
  using Error::Error;
};

// One dataset row flowing through the curation pipeline. Scores that external
// methods produce (hybrid, DOPE, train-test similarity) are ingested, never
// computed here.
struct ManifestEntry {
  std::string id;
  std::string pred_path;
  std::optional<std::string> ref_path;
  std::string ligand_path;  // may be empty when no connection table exists
  std::optional<std::string> confidence_path;
  std::optional<std::string> plddt_path;
  std::optional<double> affinity_pk;
  std::optional<structio::ChainClass> chain_class;
  std::optional<confidence::ConfidenceRecord> confidence;
  std::optional<quality::QualityReport> quality;
  std::optional<bool> physical;
  std::optional<double> train_test_similarity;
  std::optional<chem::Fingerprint> fingerprint;
};

struct TriageThresholds {
  double confidence = 0.9;   // strict >
  double pocket_rmsd = 2.0;  // strict <
};

struct TriageLabel {
  bool single_chain = false;
  bool physical = false;
  bool high_conf = false;
  std::optional<bool> high_quality;  // absent without a reference structure
};

TriageLabel triage_entry(const ManifestEntry& e, const TriageThresholds& thresholds = {});

struct SankeyFlow {
  std::string stage_from;
  std::string stage_to;
  std::size_t count = 0;
  double percent_of_parent = 0.0;  // ratio in [0, 1]
};

// Fixed stage order All -> Single/Multi -> Physical/Non-physical ->
// High-conf/Low-conf -> High-quality/Low-quality/Unassessed, each stage
// partitioning the main branch of the previous one.
std::vector<SankeyFlow> build_sankey(const std::vector<TriageLabel>& labels);

std::string format_percent(double ratio);  // 0.752 -> "75.2%"

enum class ConfidencePartition { High, Moderate, Low };

struct PartitionMap {
  std::vector<std::size_t> high;      // hybrid > 1.2
  std::vector<std::size_t> moderate;  // 1.0 <= hybrid <= 1.2
  std::vector<std::size_t> low;       // hybrid < 1.0
};

struct PartitionThresholds {
  double low = 1.0;
  double high = 1.2;
};

// Indices into `entries`, partitioned by the ingested hybrid score.
PartitionMap partition_by_hybrid(const std::vector<ManifestEntry>& entries,
                                 const PartitionThresholds& thresholds = {});

// Nested random subsets: one seeded shuffle, subsets are its prefixes, so
// each larger subset contains all smaller ones.
std::vector<std::vector<std::size_t>> nested_subsets(std::size_t population,
                                                     const std::vector<std::size_t>& sizes,
                                                     std::uint64_t seed);

struct LeakageAuditRow {
  std::string id;
  double max_similarity = 0.0;
  std::string nearest_test_id;
  bool removed = false;
};

struct LeakageResult {
  std::vector<ManifestEntry> kept;
  std::vector<ManifestEntry> removed;
  std::vector<LeakageAuditRow> audit;  // one row per input entry, input order
};

// Drops every entry whose ligand has Tanimoto similarity strictly greater
// than the cutoff to any test-set ligand. The audit rows double as the
// max-similarity histogram data.
LeakageResult leakage_filter(const std::vector<ManifestEntry>& train,
                             const std::vector<std::pair<std::string, chem::Fingerprint>>& test,
                             double cutoff = 0.9);

struct ElementGateResult {
  std::vector<ManifestEntry> kept;
  std::vector<ManifestEntry> rejected;
  std::vector<std::pair<std::string, std::vector<std::string>>> offenders;  // id -> elements
};

// Applies the element whitelist to each entry's ligand graph; graphs are
// supplied index-parallel to the entries.
ElementGateResult element_gate(const std::vector<ManifestEntry>& entries,
                               const std::vector<chem::MolecularGraph>& graphs);

// ---------------------------------------------------------------------------
// Manifest I/O (JSON Lines; one entry per line)

ManifestEntry entry_from_json(const nlohmann::json& j);
nlohmann::ordered_json entry_to_json(const ManifestEntry& e);

std::vector<ManifestEntry> read_manifest_jsonl(std::istream& in);
std::vector<ManifestEntry> parse_manifest_jsonl(std::string_view text);

// Entries are written sorted by id; floats carry six decimal places.
void write_manifest_jsonl(const std::vector<ManifestEntry>& entries, std::ostream& out);
void write_manifest_csv(const std::vector<ManifestEntry>& entries, std::ostream& out);

}  // namespace plcurate::triage
