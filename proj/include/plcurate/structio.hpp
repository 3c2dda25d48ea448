#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plcurate/chem.hpp"
#include "plcurate/errors.hpp"
#include "plcurate/vec3.hpp"

namespace plcurate::structio {

struct AtomRecord {
  int serial = 0;
  std::string name;
  std::string element;       // canonical symbol, e.g. "C", "Cl"
  char alt_loc = '\0';       // '\0' when absent
  std::string residue_name;
  char chain_id = ' ';
  int residue_seq = 0;
  char insertion_code = '\0';
  Vec3 position;
  double occupancy = 1.0;
  double temp_factor = 0.0;  // per-atom pLDDT in predicted structures
  bool is_hetero = false;

  bool is_hydrogen() const { return chem::is_hydrogen(element); }
};

struct ResidueKey {
  char chain_id = ' ';
  int residue_seq = 0;
  char insertion_code = '\0';

  auto operator<=>(const ResidueKey&) const = default;
};

struct Residue {
  int seq = 0;
  char insertion_code = '\0';
  std::string name;
  std::vector<AtomRecord> atoms;
};

struct Chain {
  char id = ' ';
  std::vector<Residue> residues;
};

enum class ChainClass { SingleChain, MultiChain };

struct ComplexStructure {
  std::vector<Chain> polymer_chains;
  std::vector<AtomRecord> ligand_atoms;
  std::optional<chem::MolecularGraph> ligand_graph;
  std::string source_id;

  std::size_t polymer_atom_count() const;
  std::size_t residue_count() const;
  std::size_t ligand_heavy_atom_count() const;

  // Polymer atoms in file order, flattened.
  template <typename Fn>
  void for_each_polymer_atom(Fn&& fn) const {
    for (const auto& chain : polymer_chains)
      for (const auto& res : chain.residues)
        for (const auto& atom : res.atoms) fn(chain, res, atom);
  }
};

// ---------------------------------------------------------------------------
// Errors

struct MalformedRecord : Error {
  std::size_t line;
  MalformedRecord(std::size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};
struct EmptyStructure : Error {
  using Error::Error;
};
struct FieldOverflow : Error {
  using Error::Error;
};
struct MalformedCountsLine : Error {
  using Error::Error;
};
struct AtomIndexOutOfRange : Error {
  using Error::Error;
};
struct NoPolymer : Error {
  using Error::Error;
};
struct NoLigand : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Operations

struct PdbParseOptions {
  // HETATM residue names dropped entirely (waters and monoatomic ions).
  std::vector<std::string> water_names = {"HOH", "WAT"};
  std::vector<std::string> excluded_ions = {"LI", "NA", "K",  "RB", "CS", "MG", "CA", "SR",
                                            "BA", "MN", "FE", "CO", "NI", "CU", "ZN", "CD",
                                            "HG", "AL", "PB", "F",  "CL", "BR", "IOD"};
};

// PDB v3.3 fixed-column subset: ATOM/HETATM/TER/MODEL/ENDMDL/END. Only the
// first MODEL is read. Among alternate locations the highest-occupancy
// conformer is kept, ties broken by alphabetical altLoc.
ComplexStructure parse_pdb(std::string_view text, std::string source_id = "",
                           const PdbParseOptions& options = {});

std::string write_pdb(const ComplexStructure& s);

// SDF with V2000 connection tables; records split on "$$$$".
std::vector<chem::MolecularGraph> parse_sdf(std::string_view text);

// Record titles (first header line, trimmed) parallel to parse_sdf output.
std::vector<std::string> sdf_record_titles(std::string_view text);

ChainClass classify_chains(const ComplexStructure& s);  // throws NoPolymer

std::string to_string(ChainClass c);
std::optional<ChainClass> chain_class_from_string(std::string_view s);

// The ligand connection table restricted to heavy atoms, with coordinates
// taken from the structure's HETATM records (k-th heavy graph atom = k-th
// heavy ligand atom). nullopt when no graph is attached or the element
// sequences disagree.
std::optional<chem::MolecularGraph> pose_ligand_graph(const ComplexStructure& s);

}  // namespace plcurate::structio
