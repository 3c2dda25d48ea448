#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "plcurate/errors.hpp"
#include "plcurate/geometry.hpp"
#include "plcurate/structio.hpp"

namespace plcurate::confidence {

struct MissingRequiredField : Error {
  using Error::Error;
};
struct MalformedNumber : Error {
  using Error::Error;
};
struct RangeViolation : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};

// Scalar confidence metrics as emitted by a co-folding model, plus the
// template-modelling hybrid and DOPE scores when ingested from metadata.
// Only confidence_score is required.
struct ConfidenceRecord {
  double confidence_score = 0.0;
  std::optional<double> ptm;
  std::optional<double> iptm;
  std::optional<double> ligand_iptm;
  std::optional<double> protein_iptm;
  std::optional<double> complex_plddt;
  std::optional<double> complex_pde;
  std::optional<double> complex_ipde;
  std::optional<double> ligand_plddt;
  std::optional<double> pocket_plddt;
  std::optional<double> shell_plddt;
  std::optional<double> hybrid_score;
  std::optional<double> dope_score;
};

ConfidenceRecord load_confidence(std::string_view json_text);
ConfidenceRecord confidence_from_json(const nlohmann::json& j);
nlohmann::ordered_json confidence_to_json(const ConfidenceRecord& r);

enum class PlddtGranularity { PerAtom, PerToken };

// Per-atom: one value per parsed atom (polymer atoms in file order, then
// ligand atoms). Per-token: one value per polymer residue followed by one per
// ligand heavy atom. The granularity is inferred from the vector length.
struct PlddtVector {
  std::vector<double> values;
  PlddtGranularity granularity = PlddtGranularity::PerAtom;
};

// Accepts a JSON array or whitespace-separated numbers.
PlddtVector load_plddt(std::string_view text, const structio::ComplexStructure& s);

struct RegionPlddt {
  std::optional<double> ligand;
  std::optional<double> pocket;
  std::optional<double> shell;
};

// Mean pLDDT over ligand heavy atoms and over the atoms (or residues) of the
// pocket and shell selections. Regions are selected on the same (predicted)
// structure the vector is aligned to.
RegionPlddt region_plddt(const PlddtVector& v, const geometry::RegionSelection& sel,
                         const structio::ComplexStructure& s);

// Strict: high confidence means a score above the threshold.
bool is_high_confidence(const ConfidenceRecord& r, double threshold = 0.9);

}  // namespace plcurate::confidence
