#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "plcurate/chem.hpp"
#include "plcurate/structio.hpp"

namespace plcurate::plausibility {

struct MissingCoordinates : Error {
  using Error::Error;
};
struct MissingConnectionTable : Error {
  using Error::Error;
};

// Covalent (Cordero 2008) and van der Waals (Bondi 1964 with common
// extensions) radii in angstroms. Unlisted elements fall back to 1.50/2.00.
class RadiusTable {
 public:
  static const RadiusTable& builtin();
  static RadiusTable from_csv(std::string_view text);

  double covalent(std::string_view element) const;
  double vdw(std::string_view element) const;
  double max_vdw() const { return max_vdw_; }

  std::string to_csv() const;

 private:
  struct Radii {
    double covalent;
    double vdw;
  };
  std::unordered_map<std::string, Radii> radii_;
  double max_vdw_ = 2.0;

  void insert(const std::string& element, double covalent, double vdw);
};

struct PlausibilityOptions {
  double bond_tolerance = 0.25;  // relative deviation from covalent-sum length
  double clash_factor = 0.75;    // of the vdW-sum distance
};

struct BondLengthViolation {
  int atom_a = 0;
  int atom_b = 0;
  double observed = 0.0;
  double expected = 0.0;
};

struct ClashPair {
  structio::ResidueKey residue;
  std::string atom_name;
  int ligand_atom = 0;  // heavy-atom index
  double distance = 0.0;
  double threshold = 0.0;
};

struct PlausibilityReport {
  std::vector<BondLengthViolation> bond_length_violations;
  std::vector<ClashPair> clash_pairs;
  bool connectivity_preserved = true;
  bool physical = true;
};

// Bonds whose observed length deviates from the covalent-radius-sum
// expectation by more than the tolerance.
std::vector<BondLengthViolation> check_bond_lengths(const chem::MolecularGraph& g,
                                                    const RadiusTable& table = RadiusTable::builtin(),
                                                    double tolerance = 0.25);

// Protein/ligand heavy-atom pairs closer than clash_factor times the vdW sum.
std::vector<ClashPair> check_clashes(const structio::ComplexStructure& s,
                                     const RadiusTable& table = RadiusTable::builtin(),
                                     double clash_factor = 0.75);

// True iff the bond graph inferred from the pose geometry (covalent-distance
// criterion, same tolerance band) is isomorphic to the input connection
// table, heavy atoms only, bond orders ignored.
bool check_connectivity(const chem::MolecularGraph& pose, const chem::MolecularGraph& input_table,
                        const RadiusTable& table = RadiusTable::builtin(), double tolerance = 0.25);

bool physical_verdict(const PlausibilityReport& report);

// Runs all three checks for a prediction; requires an attached ligand
// connection table (structio::pose_ligand_graph).
PlausibilityReport assess(const structio::ComplexStructure& pred,
                          const RadiusTable& table = RadiusTable::builtin(),
                          const PlausibilityOptions& opts = {});

}  // namespace plcurate::plausibility
