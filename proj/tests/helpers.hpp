#pragma once

// Shared fixtures for the test suites: small molecules, synthetic complexes
// and brute-force reference implementations used as oracles.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "plcurate/chem.hpp"
#include "plcurate/geometry.hpp"
#include "plcurate/random.hpp"
#include "plcurate/structio.hpp"

namespace testutil {

using plcurate::SplitMix64;
using plcurate::Vec3;
namespace chem = plcurate::chem;
namespace geometry = plcurate::geometry;
namespace structio = plcurate::structio;

// --------------------------------------------------------------------------
// Molecules

inline chem::MolecularGraph benzene(double radius = 1.39) {
  chem::MolecularGraph g;
  for (int i = 0; i < 6; ++i) {
    const double a = i * M_PI / 3.0;
    g.atoms.push_back({"C", 0, {radius * std::cos(a), radius * std::sin(a), 0.0}});
  }
  for (int i = 0; i < 6; ++i) g.bonds.push_back({i, (i + 1) % 6, chem::BondOrder::Aromatic});
  return g;
}

inline chem::MolecularGraph linear_chain(const std::vector<std::string>& elements,
                                         double spacing = 1.5) {
  chem::MolecularGraph g;
  for (std::size_t i = 0; i < elements.size(); ++i)
    g.atoms.push_back({elements[i], 0, {spacing * static_cast<double>(i), 0.0, 0.0}});
  for (std::size_t i = 0; i + 1 < elements.size(); ++i)
    g.bonds.push_back({static_cast<int>(i), static_cast<int>(i) + 1, chem::BondOrder::Single});
  return g;
}

inline chem::MolecularGraph methane_heavy() { return linear_chain({"C"}); }

// Connected random molecule: a tree plus a few extra edges.
inline chem::MolecularGraph random_graph(SplitMix64& rng, int n_atoms, int extra_edges = 2) {
  static const std::vector<std::string> pool = {"C", "N", "O", "S"};
  chem::MolecularGraph g;
  for (int i = 0; i < n_atoms; ++i)
    g.atoms.push_back({pool[rng.bounded(pool.size())], 0,
                       {rng.uniform() * 10, rng.uniform() * 10, rng.uniform() * 10}});
  std::set<std::pair<int, int>> used;
  auto add_edge = [&](int a, int b) {
    if (a == b) return false;
    auto key = std::minmax(a, b);
    if (!used.insert({key.first, key.second}).second) return false;
    const auto order = static_cast<chem::BondOrder>(1 + rng.bounded(4));
    g.bonds.push_back({a, b, order});
    return true;
  };
  for (int i = 1; i < n_atoms; ++i) add_edge(i, static_cast<int>(rng.bounded(i)));
  for (int e = 0; e < extra_edges && n_atoms > 2; ++e)
    add_edge(static_cast<int>(rng.bounded(n_atoms)), static_cast<int>(rng.bounded(n_atoms)));
  return g;
}

// Relabel atoms by `perm` (atom i moves to index perm[i]).
inline chem::MolecularGraph relabel(const chem::MolecularGraph& g, const std::vector<int>& perm) {
  chem::MolecularGraph out;
  out.atoms.resize(g.atoms.size());
  for (std::size_t i = 0; i < g.atoms.size(); ++i) out.atoms[perm[i]] = g.atoms[i];
  for (const auto& b : g.bonds) out.bonds.push_back({perm[b.a], perm[b.b], b.order});
  return out;
}

// O(n!) reference: all element- and bond-preserving permutations.
inline std::vector<std::vector<int>> brute_force_automorphisms(const chem::MolecularGraph& g) {
  const int n = static_cast<int>(g.atoms.size());
  std::set<std::tuple<int, int, int>> bond_set;
  for (const auto& b : g.bonds) {
    auto key = std::minmax(b.a, b.b);
    bond_set.insert({key.first, key.second, static_cast<int>(b.order)});
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = g.atoms[i].element == g.atoms[perm[i]].element;
    for (const auto& b : g.bonds) {
      if (!ok) break;
      auto key = std::minmax(perm[b.a], perm[b.b]);
      ok = bond_set.count({key.first, key.second, static_cast<int>(b.order)}) > 0;
    }
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// --------------------------------------------------------------------------
// Rigid motions

inline geometry::Mat3 random_rotation(SplitMix64& rng) {
  // Uniform rotation from a random unit quaternion (Shoemake).
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double s1 = std::sqrt(1 - u1), s2 = std::sqrt(u1);
  const double w = s1 * std::sin(2 * M_PI * u2);
  const double x = s1 * std::cos(2 * M_PI * u2);
  const double y = s2 * std::sin(2 * M_PI * u3);
  const double z = s2 * std::cos(2 * M_PI * u3);
  geometry::Mat3 r;
  r.m = {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
          {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
          {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
  return r;
}

inline geometry::RigidTransform random_rigid(SplitMix64& rng, double translation_scale = 10.0) {
  geometry::RigidTransform t;
  t.rotation = random_rotation(rng);
  t.translation = {(rng.uniform() - 0.5) * 2 * translation_scale,
                   (rng.uniform() - 0.5) * 2 * translation_scale,
                   (rng.uniform() - 0.5) * 2 * translation_scale};
  return t;
}

inline std::vector<Vec3> apply_all(const geometry::RigidTransform& t, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(t.apply(p));
  return out;
}

inline void apply_to_structure(const geometry::RigidTransform& t, structio::ComplexStructure& s) {
  for (auto& chain : s.polymer_chains)
    for (auto& res : chain.residues)
      for (auto& atom : res.atoms) atom.position = t.apply(atom.position);
  for (auto& atom : s.ligand_atoms) atom.position = t.apply(atom.position);
  if (s.ligand_graph)
    for (auto& atom : s.ligand_graph->atoms) atom.position = t.apply(atom.position);
}

// --------------------------------------------------------------------------
// Synthetic complexes

// A toy single-residue building block: three heavy atoms around a centre,
// deliberately non-collinear so superpositions are well conditioned.
inline structio::Residue make_residue(int seq, const Vec3& center, const std::string& name = "ALA") {
  structio::Residue res{seq, '\0', name, {}};
  const char* atom_names[3] = {"N", "CA", "C"};
  const Vec3 offsets[3] = {{-0.7, 0.3, 0}, {0, 0, 0}, {0.7, -0.2, 0.4}};
  for (int i = 0; i < 3; ++i) {
    structio::AtomRecord a;
    a.serial = seq * 10 + i + 1;
    a.name = atom_names[i];
    a.element = atom_names[i][0] == 'N' ? "N" : "C";
    a.residue_name = name;
    a.chain_id = 'A';
    a.residue_seq = seq;
    a.position = center + offsets[i];
    a.occupancy = 1.0;
    res.atoms.push_back(std::move(a));
  }
  return res;
}

// Synthetic complex: `n_residues` toy residues on a line plus a benzene
// ligand near the first residues.
inline structio::ComplexStructure synthetic_complex(int n_residues = 12,
                                                    const Vec3& ligand_center = {0, 4.5, 0}) {
  structio::ComplexStructure s;
  s.source_id = "synthetic";
  structio::Chain chain{'A', {}};
  for (int i = 0; i < n_residues; ++i) {
    const Vec3 c{3.0 * i, 1.5 * std::sin(0.9 * i), 1.2 * std::cos(0.7 * i)};
    chain.residues.push_back(make_residue(i + 1, c));
  }
  s.polymer_chains.push_back(std::move(chain));

  chem::MolecularGraph lig = benzene();
  for (std::size_t i = 0; i < lig.atoms.size(); ++i) {
    lig.atoms[i].position += ligand_center;
    structio::AtomRecord a;
    a.serial = 9000 + static_cast<int>(i);
    a.name = "C" + std::to_string(i + 1);
    a.element = "C";
    a.residue_name = "LIG";
    a.chain_id = 'L';
    a.residue_seq = 900;
    a.position = lig.atoms[i].position;
    a.is_hetero = true;
    s.ligand_atoms.push_back(std::move(a));
  }
  s.ligand_graph = std::move(lig);
  return s;
}

// Fully random complex for grid-vs-brute-force style property tests.
inline structio::ComplexStructure random_complex(SplitMix64& rng, int n_residues, int n_ligand,
                                                 double box = 30.0) {
  structio::ComplexStructure s;
  s.source_id = "random";
  structio::Chain chain{'A', {}};
  for (int i = 0; i < n_residues; ++i) {
    const Vec3 c{rng.uniform() * box, rng.uniform() * box, rng.uniform() * box};
    chain.residues.push_back(make_residue(i + 1, c));
  }
  s.polymer_chains.push_back(std::move(chain));
  for (int i = 0; i < n_ligand; ++i) {
    structio::AtomRecord a;
    a.serial = 5000 + i;
    a.name = "C" + std::to_string(i + 1);
    a.element = "C";
    a.residue_name = "LIG";
    a.chain_id = 'L';
    a.residue_seq = 500;
    a.position = {rng.uniform() * box, rng.uniform() * box, rng.uniform() * box};
    a.is_hetero = true;
    s.ligand_atoms.push_back(std::move(a));
  }
  return s;
}

}  // namespace testutil
