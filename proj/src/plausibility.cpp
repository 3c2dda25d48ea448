#include "plcurate/plausibility.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "plcurate/geometry.hpp"

namespace plcurate::plausibility {

namespace {

struct BuiltinRadius {
  const char* element;
  double covalent;
  double vdw;
};

// Covalent: Cordero et al., Dalton Trans. 2008 (single-bond, low-spin for
// Fe/Co/Ni). vdW: Bondi 1964, gaps filled from Mantina 2009 / Batsanov 2001.
constexpr BuiltinRadius kBuiltinRadii[] = {
    {"H", 0.31, 1.20},  {"He", 0.28, 1.40}, {"Li", 1.28, 1.82}, {"Be", 0.96, 1.53},
    {"B", 0.84, 1.92},  {"C", 0.76, 1.70},  {"N", 0.71, 1.55},  {"O", 0.66, 1.52},
    {"F", 0.57, 1.47},  {"Ne", 0.58, 1.54}, {"Na", 1.66, 2.27}, {"Mg", 1.41, 1.73},
    {"Al", 1.21, 1.84}, {"Si", 1.11, 2.10}, {"P", 1.07, 1.80},  {"S", 1.05, 1.80},
    {"Cl", 1.02, 1.75}, {"Ar", 1.06, 1.88}, {"K", 2.03, 2.75},  {"Ca", 1.76, 2.31},
    {"Mn", 1.39, 2.05}, {"Fe", 1.32, 2.04}, {"Co", 1.26, 2.00}, {"Ni", 1.24, 1.63},
    {"Cu", 1.32, 1.40}, {"Zn", 1.22, 1.39}, {"Ga", 1.22, 1.87}, {"Ge", 1.20, 2.11},
    {"As", 1.19, 1.85}, {"Se", 1.20, 1.90}, {"Br", 1.20, 1.85}, {"Kr", 1.16, 2.02},
    {"Ru", 1.46, 2.05}, {"Rh", 1.42, 2.00}, {"Pd", 1.39, 1.63}, {"Ag", 1.45, 1.72},
    {"Cd", 1.44, 1.58}, {"In", 1.42, 1.93}, {"Sn", 1.39, 2.17}, {"Sb", 1.39, 2.06},
    {"Te", 1.38, 2.06}, {"I", 1.39, 1.98},  {"Xe", 1.40, 2.16}, {"Pt", 1.36, 1.75},
    {"Au", 1.36, 1.66}, {"Hg", 1.32, 1.55}, {"Pb", 1.46, 2.02},
};

constexpr double kDefaultCovalent = 1.50;
constexpr double kDefaultVdw = 2.00;

}  // namespace

void RadiusTable::insert(const std::string& element, double covalent, double vdw) {
  radii_[element] = {covalent, vdw};
  max_vdw_ = std::max(max_vdw_, vdw);
}

const RadiusTable& RadiusTable::builtin() {
  static const RadiusTable* table = [] {
    auto* t = new RadiusTable();
    for (const auto& r : kBuiltinRadii) t->insert(r.element, r.covalent, r.vdw);
    return t;
  }();
  return *table;
}

RadiusTable RadiusTable::from_csv(std::string_view text) {
  RadiusTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string element, cov, vdw;
    if (!std::getline(fields, element, ',') || !std::getline(fields, cov, ',') ||
        !std::getline(fields, vdw, ','))
      throw Error("radius table line " + std::to_string(line_no) +
                  ": expected element,covalent,vdw");
    if (element == "element") continue;  // header row
    const std::string symbol = chem::normalize_element(element);
    if (!chem::is_valid_element(symbol))
      throw Error("radius table line " + std::to_string(line_no) + ": unknown element");
    try {
      table.insert(symbol, std::stod(cov), std::stod(vdw));
    } catch (const std::exception&) {
      throw Error("radius table line " + std::to_string(line_no) + ": cannot parse radius");
    }
  }
  if (table.radii_.empty()) throw Error("radius table is empty");
  return table;
}

std::string RadiusTable::to_csv() const {
  std::vector<std::pair<std::string, Radii>> rows(radii_.begin(), radii_.end());
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out = "element,covalent_radius,vdw_radius\n";
  char buf[64];
  for (const auto& [el, r] : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.2f,%.2f\n", el.c_str(), r.covalent, r.vdw);
    out += buf;
  }
  return out;
}

double RadiusTable::covalent(std::string_view element) const {
  auto it = radii_.find(std::string(element));
  return it == radii_.end() ? kDefaultCovalent : it->second.covalent;
}

double RadiusTable::vdw(std::string_view element) const {
  auto it = radii_.find(std::string(element));
  return it == radii_.end() ? kDefaultVdw : it->second.vdw;
}

// ---------------------------------------------------------------------------

std::vector<BondLengthViolation> check_bond_lengths(const chem::MolecularGraph& g,
                                                    const RadiusTable& table, double tolerance) {
  if (g.atoms.size() > 1) {
    const bool all_at_origin = std::all_of(g.atoms.begin(), g.atoms.end(), [](const auto& a) {
      return a.position.x == 0.0 && a.position.y == 0.0 && a.position.z == 0.0;
    });
    if (all_at_origin && !g.bonds.empty())
      throw MissingCoordinates("graph carries no 3D coordinates");
  }

  std::vector<BondLengthViolation> violations;
  for (const auto& b : g.bonds) {
    const double observed = distance(g.atoms[b.a].position, g.atoms[b.b].position);
    const double expected = table.covalent(g.atoms[b.a].element) +
                            table.covalent(g.atoms[b.b].element);
    if (std::abs(observed - expected) > tolerance * expected)
      violations.push_back({b.a, b.b, observed, expected});
  }
  return violations;
}

std::vector<ClashPair> check_clashes(const structio::ComplexStructure& s,
                                     const RadiusTable& table, double clash_factor) {
  std::vector<Vec3> ligand_pos;
  std::vector<std::string> ligand_el;
  for (const auto& a : s.ligand_atoms) {
    if (a.is_hydrogen()) continue;
    ligand_pos.push_back(a.position);
    ligand_el.push_back(a.element);
  }
  if (ligand_pos.empty()) throw structio::NoLigand("no ligand heavy atoms");

  std::vector<ClashPair> clashes;
  if (s.polymer_atom_count() == 0) return clashes;

  const double cell = clash_factor * 2.0 * table.max_vdw();
  const geometry::NeighborGrid grid(ligand_pos, cell);
  std::vector<int> hits;
  s.for_each_polymer_atom([&](const auto& chain, const auto& res, const auto& atom) {
    if (atom.is_hydrogen()) return;
    grid.query(atom.position, cell, hits);
    const double rp = table.vdw(atom.element);
    for (int idx : hits) {
      const double threshold = clash_factor * (rp + table.vdw(ligand_el[idx]));
      const double d = distance(atom.position, ligand_pos[idx]);
      if (d < threshold)
        clashes.push_back({{chain.id, res.seq, res.insertion_code}, atom.name, idx, d, threshold});
    }
  });
  return clashes;
}

bool check_connectivity(const chem::MolecularGraph& pose, const chem::MolecularGraph& input_table,
                        const RadiusTable& table, double tolerance) {
  const chem::MolecularGraph pose_heavy = pose.heavy_copy();
  const chem::MolecularGraph input_heavy = input_table.heavy_copy();

  chem::MolecularGraph inferred;
  inferred.atoms = pose_heavy.atoms;
  const int n = static_cast<int>(inferred.atoms.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double expected = table.covalent(inferred.atoms[i].element) +
                              table.covalent(inferred.atoms[j].element);
      const double d = distance(inferred.atoms[i].position, inferred.atoms[j].position);
      if (std::abs(d - expected) <= tolerance * expected)
        inferred.bonds.push_back({i, j, chem::BondOrder::Single});
    }

  return chem::find_isomorphism(inferred, input_heavy, /*match_bond_order=*/false).has_value();
}

bool physical_verdict(const PlausibilityReport& report) {
  return report.bond_length_violations.empty() && report.clash_pairs.empty() &&
         report.connectivity_preserved;
}

PlausibilityReport assess(const structio::ComplexStructure& pred, const RadiusTable& table,
                          const PlausibilityOptions& opts) {
  const auto pose = structio::pose_ligand_graph(pred);
  if (!pose)
    throw MissingConnectionTable(
        "plausibility checks need a ligand connection table aligned with the pose");

  PlausibilityReport report;
  report.bond_length_violations = check_bond_lengths(*pose, table, opts.bond_tolerance);
  report.clash_pairs = check_clashes(pred, table, opts.clash_factor);
  report.connectivity_preserved =
      check_connectivity(*pose, *pred.ligand_graph, table, opts.bond_tolerance);
  report.physical = physical_verdict(report);
  return report;
}

}  // namespace plcurate::plausibility
