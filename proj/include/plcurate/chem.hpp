#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plcurate/errors.hpp"
#include "plcurate/vec3.hpp"

namespace plcurate::chem {

// ---------------------------------------------------------------------------
// Elements

// Atomic number for a symbol in canonical capitalisation ("Cl", not "CL"),
// 0 if the symbol is not a periodic-table element.
int atomic_number(std::string_view symbol);
bool is_valid_element(std::string_view symbol);

// "CL" / "cl" / " Cl" -> "Cl". Returns empty string for empty input.
std::string normalize_element(std::string_view raw);

inline bool is_hydrogen(std::string_view symbol) {
  return symbol == "H" || symbol == "D" || symbol == "T";
}

// ---------------------------------------------------------------------------
// Molecular graph

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct GraphAtom {
  std::string element;
  int formal_charge = 0;
  Vec3 position;
};

struct GraphBond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
};

struct InvalidGraph : Error {
  using Error::Error;
};

struct MolecularGraph {
  std::vector<GraphAtom> atoms;
  std::vector<GraphBond> bonds;

  // Throws InvalidGraph on self-bonds, duplicate bonds or out-of-range
  // endpoints.
  void validate() const;

  std::size_t heavy_atom_count() const;

  // Graph restricted to non-hydrogen atoms; bonds to hydrogens are dropped.
  MolecularGraph heavy_copy() const;
};

// Atom indices that sit on at least one cycle (computed via bridge detection).
std::vector<bool> ring_atoms(const MolecularGraph& g);

// ---------------------------------------------------------------------------
// Element whitelist

struct WhitelistResult {
  bool pass = true;
  std::vector<std::string> offenders;  // unique, in first-seen order
};

// Passes iff every atom is one of H, B, C, N, O, F, P, S, Cl, Br, I.
WhitelistResult element_whitelist_check(const MolecularGraph& g);

// ---------------------------------------------------------------------------
// Fingerprints

struct EmptyMolecule : Error {
  using Error::Error;
};
struct WidthMismatch : Error {
  using Error::Error;
};

struct Fingerprint {
  static constexpr int kDefaultWidth = 2048;
  static constexpr int kDefaultRadius = 2;

  std::vector<std::uint64_t> words;
  int width = 0;

  explicit Fingerprint(int w = kDefaultWidth) : words((w + 63) / 64, 0), width(w) {}

  void set(std::uint64_t bit) { words[bit >> 6] |= 1ULL << (bit & 63); }
  bool test(std::uint64_t bit) const { return (words[bit >> 6] >> (bit & 63)) & 1; }
  int popcount() const;

  bool operator==(const Fingerprint& o) const = default;

  // Bytes in bit order, two lowercase hex digits per byte.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex);
};

// ECFP-style circular fingerprint over the heavy-atom graph.
//
// Initial atom invariant hashes (atomic number, heavy degree, formal charge,
// in-ring flag); each round hashes (round, own invariant, sorted list of
// (bond-order code, neighbour invariant)). The mix step is the 64-bit
// boost-style combine  h ^= v + 0x9E3779B97F4A7C15 + (h << 6) + (h >> 2),
// so bit assignment is identical on every platform. Environments whose bond
// set duplicates one already emitted are skipped, smallest invariant first,
// which makes the result independent of atom numbering.
Fingerprint morgan_fingerprint(const MolecularGraph& g,
                               int radius = Fingerprint::kDefaultRadius,
                               int width = Fingerprint::kDefaultWidth);

// |a AND b| / |a OR b|; 1.0 when both fingerprints are empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// ---------------------------------------------------------------------------
// Symmetry

struct AutomorphismOptions {
  std::size_t limit = 10000;
  std::chrono::milliseconds time_budget{1000};
};

struct AutomorphismResult {
  std::vector<std::vector<int>> permutations;  // identity is always first
  bool truncated = false;
};

// All element- and bond-preserving atom permutations of a heavy-atom graph,
// up to opts.limit. When the limit or time budget is hit the list returned so
// far is flagged truncated (it still contains the identity).
AutomorphismResult graph_automorphisms(const MolecularGraph& g,
                                       const AutomorphismOptions& opts = {});

// One element-preserving (and, if match_bond_order, order-preserving) graph
// isomorphism a -> b, or nullopt. mapping[i] is the index in b matched to
// atom i of a.
std::optional<std::vector<int>> find_isomorphism(const MolecularGraph& a,
                                                 const MolecularGraph& b,
                                                 bool match_bond_order = true);

}  // namespace plcurate::chem
