#include "plcurate/quality.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace plcurate::quality {

namespace {

struct LigandView {
  std::vector<Vec3> positions;
  std::vector<std::string> elements;
};

LigandView heavy_ligand_view(const structio::ComplexStructure& s) {
  LigandView v;
  for (const auto& a : s.ligand_atoms) {
    if (a.is_hydrogen()) continue;
    v.positions.push_back(a.position);
    v.elements.push_back(a.element);
  }
  return v;
}

// Connection table for the ligand heavy atoms, index-aligned with the
// heavy-atom order of ligand_atoms. The attached graph is trusted only when
// its heavy-atom element sequence matches the structure's.
std::optional<chem::MolecularGraph> aligned_heavy_graph(const structio::ComplexStructure& s,
                                                        const LigandView& view) {
  if (!s.ligand_graph) return std::nullopt;
  chem::MolecularGraph heavy = s.ligand_graph->heavy_copy();
  if (heavy.atoms.size() != view.elements.size()) return std::nullopt;
  for (std::size_t i = 0; i < heavy.atoms.size(); ++i)
    if (heavy.atoms[i].element != view.elements[i]) return std::nullopt;
  return heavy;
}

struct MatchedPositions {
  std::vector<Vec3> pred;
  std::vector<Vec3> ref;
};

MatchedPositions polymer_positions(const AtomMatching& m) {
  MatchedPositions out;
  out.pred.reserve(m.polymer_pairs.size());
  out.ref.reserve(m.polymer_pairs.size());
  for (const auto& p : m.polymer_pairs) {
    out.pred.push_back(p.pred_pos);
    out.ref.push_back(p.ref_pos);
  }
  return out;
}

bool is_backbone(const std::string& name) {
  return name == "N" || name == "CA" || name == "C" || name == "O";
}

struct LigandSsd {
  double ssd = 0.0;
  bool complete = true;  // automorphism enumeration finished
};

// Sum of squared deviations over the matched ligand pairs after applying T to
// the prediction, minimised over automorphisms of the prediction's heavy
// graph. Without a usable graph the given pairing stands.
LigandSsd min_ligand_ssd(const geometry::RigidTransform& t, const LigandView& pred,
                         const LigandView& ref, const std::vector<std::pair<int, int>>& pairs,
                         const std::optional<chem::MolecularGraph>& pred_graph,
                         const chem::AutomorphismOptions& opts) {
  std::vector<Vec3> moved(pred.positions.size());
  for (std::size_t i = 0; i < pred.positions.size(); ++i) moved[i] = t.apply(pred.positions[i]);

  auto ssd_for = [&](const std::vector<int>* perm) {
    double ssd = 0;
    for (const auto& [i, j] : pairs) {
      const int pi = perm ? (*perm)[i] : i;
      ssd += distance2(moved[pi], ref.positions[j]);
    }
    return ssd;
  };

  LigandSsd out;
  if (!pred_graph) {
    out.ssd = ssd_for(nullptr);
    out.complete = false;
    return out;
  }
  const auto autos = chem::graph_automorphisms(*pred_graph, opts);
  if (autos.truncated) {
    out.ssd = ssd_for(nullptr);
    out.complete = false;
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& perm : autos.permutations) best = std::min(best, ssd_for(&perm));
  out.ssd = best;
  return out;
}

}  // namespace

AtomMatching match_atoms(const structio::ComplexStructure& pred,
                         const structio::ComplexStructure& ref) {
  AtomMatching m;

  using PolymerKey = std::tuple<char, int, char, std::string, std::string>;
  std::map<PolymerKey, Vec3> ref_atoms;
  ref.for_each_polymer_atom([&](const auto& chain, const auto& res, const auto& atom) {
    if (atom.is_hydrogen()) return;
    ref_atoms.emplace(PolymerKey{chain.id, res.seq, res.insertion_code, res.name, atom.name},
                      atom.position);
  });

  std::size_t pred_polymer_heavy = 0;
  std::set<PolymerKey> consumed;
  pred.for_each_polymer_atom([&](const auto& chain, const auto& res, const auto& atom) {
    if (atom.is_hydrogen()) return;
    ++pred_polymer_heavy;
    const PolymerKey key{chain.id, res.seq, res.insertion_code, res.name, atom.name};
    auto it = ref_atoms.find(key);
    if (it == ref_atoms.end() || consumed.count(key)) return;
    consumed.insert(key);
    m.polymer_pairs.push_back({{chain.id, res.seq, res.insertion_code}, atom.name, atom.position,
                               it->second});
  });

  const LigandView pred_lig = heavy_ligand_view(pred);
  const LigandView ref_lig = heavy_ligand_view(ref);
  const auto pred_graph = aligned_heavy_graph(pred, pred_lig);
  const auto ref_graph = aligned_heavy_graph(ref, ref_lig);

  bool matched_by_order = false;
  if (pred_graph && ref_graph) {
    if (const auto iso = chem::find_isomorphism(*pred_graph, *ref_graph)) {
      for (std::size_t i = 0; i < iso->size(); ++i)
        m.ligand_pairs.push_back({static_cast<int>(i), (*iso)[i]});
    } else if (pred_lig.positions.size() == ref_lig.positions.size()) {
      matched_by_order = true;
    } else {
      throw LigandMismatch("ligand graphs are not isomorphic and atom counts differ");
    }
  } else if (pred_lig.positions.size() == ref_lig.positions.size()) {
    matched_by_order = true;
  } else {
    throw LigandMismatch("ligand heavy-atom counts differ (" +
                         std::to_string(pred_lig.positions.size()) + " vs " +
                         std::to_string(ref_lig.positions.size()) + ")");
  }
  if (matched_by_order)
    for (std::size_t i = 0; i < pred_lig.positions.size(); ++i)
      m.ligand_pairs.push_back({static_cast<int>(i), static_cast<int>(i)});

  const std::size_t ref_total = ref_atoms.size() + ref_lig.positions.size();
  const std::size_t pred_total = pred_polymer_heavy + pred_lig.positions.size();
  const std::size_t matched = m.polymer_pairs.size() + m.ligand_pairs.size();
  m.unmatched_ref = ref_total - matched;
  m.unmatched_pred = pred_total - matched;
  m.matching_coverage =
      ref_total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(ref_total);

  if ((pred_polymer_heavy > 0 || !ref_atoms.empty()) && m.polymer_pairs.empty())
    throw EmptyIntersection("no polymer atoms match between prediction and reference");
  return m;
}

PocketRmsdResult pocket_rmsd(const structio::ComplexStructure& pred,
                             const structio::ComplexStructure& ref, const AtomMatching& matching,
                             const QualityOptions& opts) {
  if (matching.ligand_pairs.empty()) throw structio::NoLigand("no matched ligand atoms");
  // Only the pocket matters here; keep the shell cutoff valid for any pocket
  // cutoff.
  const auto sel =
      geometry::select_pocket_and_shell(ref, opts.pocket_cutoff, opts.pocket_cutoff + 2.0);

  std::vector<Vec3> fit_pred, fit_ref;
  std::vector<const PolymerPair*> pocket_pairs;
  for (const auto& pair : matching.polymer_pairs) {
    if (!sel.pocket.count(pair.residue)) continue;
    pocket_pairs.push_back(&pair);
    if (opts.backbone_only_fit && !is_backbone(pair.atom_name)) continue;
    fit_pred.push_back(pair.pred_pos);
    fit_ref.push_back(pair.ref_pos);
  }
  if (fit_pred.size() < 3)
    throw PocketTooSmall("only " + std::to_string(fit_pred.size()) +
                         " matched pocket atoms available for superposition");

  const auto fit = geometry::kabsch(fit_pred, fit_ref);
  const auto& t = fit.transform;

  double pocket_ssd = 0;
  for (const auto* pair : pocket_pairs)
    pocket_ssd += distance2(t.apply(pair->pred_pos), pair->ref_pos);

  const LigandView pred_lig = heavy_ligand_view(pred);
  const LigandView ref_lig = heavy_ligand_view(ref);
  const auto pred_graph = aligned_heavy_graph(pred, pred_lig);
  const auto lig =
      min_ligand_ssd(t, pred_lig, ref_lig, matching.ligand_pairs, pred_graph, opts.automorphisms);

  const std::size_t n = pocket_pairs.size() + matching.ligand_pairs.size();
  PocketRmsdResult result;
  result.rmsd = std::sqrt((pocket_ssd + lig.ssd) / static_cast<double>(n));
  result.pocket_size = sel.pocket.size();
  result.symmetry_corrected = lig.complete;
  return result;
}

double ligand_rmsd(const structio::ComplexStructure& pred, const structio::ComplexStructure& ref,
                   const AtomMatching& matching, const QualityOptions& opts) {
  if (matching.ligand_pairs.empty()) throw structio::NoLigand("no matched ligand atoms");
  const auto fit_points = polymer_positions(matching);
  if (fit_points.pred.size() < 3)
    throw EmptyIntersection("need at least 3 matched protein atoms for superposition");
  const auto fit = geometry::kabsch(fit_points.pred, fit_points.ref);

  const LigandView pred_lig = heavy_ligand_view(pred);
  const LigandView ref_lig = heavy_ligand_view(ref);
  const auto pred_graph = aligned_heavy_graph(pred, pred_lig);
  const auto lig = min_ligand_ssd(fit.transform, pred_lig, ref_lig, matching.ligand_pairs,
                                  pred_graph, opts.automorphisms);
  return std::sqrt(lig.ssd / static_cast<double>(matching.ligand_pairs.size()));
}

double protein_rmsd(const AtomMatching& matching) {
  const auto pts = polymer_positions(matching);
  if (pts.pred.size() < 3)
    throw EmptyIntersection("need at least 3 matched protein atoms for superposition");
  return geometry::kabsch(pts.pred, pts.ref).rmsd_after;
}

double complex_rmsd(const structio::ComplexStructure& pred, const structio::ComplexStructure& ref,
                    const AtomMatching& matching) {
  auto pts = polymer_positions(matching);
  const LigandView pred_lig = heavy_ligand_view(pred);
  const LigandView ref_lig = heavy_ligand_view(ref);
  for (const auto& [i, j] : matching.ligand_pairs) {
    pts.pred.push_back(pred_lig.positions[i]);
    pts.ref.push_back(ref_lig.positions[j]);
  }
  if (pts.pred.size() < 3)
    throw EmptyIntersection("need at least 3 matched atoms for superposition");
  return geometry::kabsch(pts.pred, pts.ref).rmsd_after;
}

QualityVerdict verdict(const QualityReport& report, double threshold) {
  return {report.pocket_rmsd < threshold, threshold};
}

QualityReport compute_quality(const structio::ComplexStructure& pred,
                              const structio::ComplexStructure& ref, const QualityOptions& opts) {
  const AtomMatching matching = match_atoms(pred, ref);
  QualityReport report;
  report.matching_coverage = matching.matching_coverage;
  report.protein_rmsd = protein_rmsd(matching);
  report.complex_rmsd = complex_rmsd(pred, ref, matching);
  report.ligand_rmsd = ligand_rmsd(pred, ref, matching, opts);
  const auto pocket = pocket_rmsd(pred, ref, matching, opts);
  report.pocket_rmsd = pocket.rmsd;
  report.pocket_size = pocket.pocket_size;
  report.symmetry_corrected = pocket.symmetry_corrected;
  return report;
}

}  // namespace plcurate::quality
