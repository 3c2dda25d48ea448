#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plcurate/chem.hpp"
#include "plcurate/geometry.hpp"
#include "plcurate/structio.hpp"

namespace plcurate::quality {

struct LigandMismatch : Error {
  using Error::Error;
};
struct EmptyIntersection : Error {
  using Error::Error;
};
struct PocketTooSmall : Error {
  using Error::Error;
};

struct PolymerPair {
  structio::ResidueKey residue;
  std::string atom_name;
  Vec3 pred_pos;
  Vec3 ref_pos;
};

// Heavy-atom correspondence between a prediction and its reference. Polymer
// atoms match on (chain, residue number, insertion code, residue name, atom
// name); ligand atoms by graph isomorphism, falling back to file order when
// no connection table is available.
struct AtomMatching {
  std::vector<PolymerPair> polymer_pairs;
  std::vector<std::pair<int, int>> ligand_pairs;  // pred/ref heavy-atom indices
  std::size_t unmatched_ref = 0;
  std::size_t unmatched_pred = 0;
  double matching_coverage = 0.0;  // matched / total reference heavy atoms
};

AtomMatching match_atoms(const structio::ComplexStructure& pred,
                         const structio::ComplexStructure& ref);

struct QualityOptions {
  double pocket_cutoff = 6.0;
  bool backbone_only_fit = false;  // restrict the pocket superposition set
  chem::AutomorphismOptions automorphisms;
  double high_quality_threshold = 2.0;
};

struct QualityReport {
  double complex_rmsd = 0.0;
  double protein_rmsd = 0.0;
  double ligand_rmsd = 0.0;
  double pocket_rmsd = 0.0;
  std::size_t pocket_size = 0;  // residues in the reference pocket
  double matching_coverage = 0.0;
  bool symmetry_corrected = false;
};

struct QualityVerdict {
  bool high_quality = false;
  double threshold = 2.0;
};

struct PocketRmsdResult {
  double rmsd = 0.0;
  std::size_t pocket_size = 0;
  bool symmetry_corrected = false;
};

// Superpose on matched pocket-residue heavy atoms, then RMSD over those atoms
// plus the matched ligand heavy atoms; ligand pairing minimised over graph
// automorphisms.
PocketRmsdResult pocket_rmsd(const structio::ComplexStructure& pred,
                             const structio::ComplexStructure& ref, const AtomMatching& matching,
                             const QualityOptions& opts = {});

// Superpose on all matched protein heavy atoms, then symmetry-minimised RMSD
// over the ligand heavy atoms.
double ligand_rmsd(const structio::ComplexStructure& pred, const structio::ComplexStructure& ref,
                   const AtomMatching& matching, const QualityOptions& opts = {});

double protein_rmsd(const AtomMatching& matching);

// Superpose and evaluate over all matched heavy atoms (protein + ligand).
double complex_rmsd(const structio::ComplexStructure& pred, const structio::ComplexStructure& ref,
                    const AtomMatching& matching);

QualityVerdict verdict(const QualityReport& report, double threshold = 2.0);

// The full per-entry protocol: matching plus all four metrics.
QualityReport compute_quality(const structio::ComplexStructure& pred,
                              const structio::ComplexStructure& ref,
                              const QualityOptions& opts = {});

}  // namespace plcurate::quality
