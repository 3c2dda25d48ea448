#include "plcurate/confidence.hpp"

#include <charconv>
#include <cmath>

namespace plcurate::confidence {

namespace {

using nlohmann::json;

double number_field(const json& j, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_number()) throw MalformedNumber(std::string(name) + " is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw MalformedNumber(std::string(name) + " is not finite");
  return d;
}

void check_unit_interval(const char* name, double v) {
  if (v < 0.0 || v > 1.0)
    throw RangeViolation(std::string(name) + " = " + std::to_string(v) + " outside [0, 1]");
}

void check_plddt_range(const char* name, double v) {
  if (v < 0.0 || v > 100.0)
    throw RangeViolation(std::string(name) + " = " + std::to_string(v) + " outside [0, 100]");
}

constexpr const char* kUnitFields[] = {"ptm", "iptm", "ligand_iptm", "protein_iptm"};
constexpr const char* kPlddtFields[] = {"complex_plddt", "ligand_plddt", "pocket_plddt",
                                        "shell_plddt"};
constexpr const char* kFreeFields[] = {"complex_pde", "complex_ipde", "hybrid_score",
                                       "dope_score"};

std::optional<double>& field_ref(ConfidenceRecord& r, std::string_view name) {
  if (name == "ptm") return r.ptm;
  if (name == "iptm") return r.iptm;
  if (name == "ligand_iptm") return r.ligand_iptm;
  if (name == "protein_iptm") return r.protein_iptm;
  if (name == "complex_plddt") return r.complex_plddt;
  if (name == "complex_pde") return r.complex_pde;
  if (name == "complex_ipde") return r.complex_ipde;
  if (name == "ligand_plddt") return r.ligand_plddt;
  if (name == "pocket_plddt") return r.pocket_plddt;
  if (name == "shell_plddt") return r.shell_plddt;
  if (name == "hybrid_score") return r.hybrid_score;
  return r.dope_score;
}

}  // namespace

ConfidenceRecord confidence_from_json(const json& j) {
  if (!j.is_object()) throw MalformedNumber("confidence document is not a JSON object");
  if (!j.contains("confidence_score"))
    throw MissingRequiredField("confidence_score missing from confidence record");

  ConfidenceRecord r;
  r.confidence_score = number_field(j, "confidence_score");
  check_unit_interval("confidence_score", r.confidence_score);

  for (const char* name : kUnitFields) {
    if (!j.contains(name)) continue;
    const double v = number_field(j, name);
    check_unit_interval(name, v);
    field_ref(r, name) = v;
  }
  for (const char* name : kPlddtFields) {
    if (!j.contains(name)) continue;
    const double v = number_field(j, name);
    check_plddt_range(name, v);
    field_ref(r, name) = v;
  }
  for (const char* name : kFreeFields) {
    if (!j.contains(name)) continue;
    field_ref(r, name) = number_field(j, name);
  }
  return r;  // unknown fields are ignored
}

ConfidenceRecord load_confidence(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw MalformedNumber("confidence file is not valid JSON");
  return confidence_from_json(j);
}

nlohmann::ordered_json confidence_to_json(const ConfidenceRecord& r) {
  nlohmann::ordered_json j;
  j["confidence_score"] = r.confidence_score;
  auto put = [&j](const char* name, const std::optional<double>& v) {
    if (v) j[name] = *v;
  };
  put("ptm", r.ptm);
  put("iptm", r.iptm);
  put("ligand_iptm", r.ligand_iptm);
  put("protein_iptm", r.protein_iptm);
  put("complex_plddt", r.complex_plddt);
  put("complex_pde", r.complex_pde);
  put("complex_ipde", r.complex_ipde);
  put("ligand_plddt", r.ligand_plddt);
  put("pocket_plddt", r.pocket_plddt);
  put("shell_plddt", r.shell_plddt);
  put("hybrid_score", r.hybrid_score);
  put("dope_score", r.dope_score);
  return j;
}

// ---------------------------------------------------------------------------
// pLDDT vectors

PlddtVector load_plddt(std::string_view text, const structio::ComplexStructure& s) {
  PlddtVector v;

  json j = json::parse(text, nullptr, false);
  if (!j.is_discarded() && j.is_array()) {
    for (const auto& e : j) {
      if (!e.is_number()) throw MalformedNumber("pLDDT array holds a non-number");
      v.values.push_back(e.get<double>());
    }
  } else {
    // Whitespace-separated numbers.
    const char* p = text.data();
    const char* end = text.data() + text.size();
    while (p != end) {
      while (p != end && (*p == ' ' || *p == '\t' || *p == '\n' || *p == '\r')) ++p;
      if (p == end) break;
      double value = 0;
      const auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc()) throw MalformedNumber("cannot parse pLDDT value");
      v.values.push_back(value);
      p = next;
    }
  }

  const std::size_t n_atoms = s.polymer_atom_count() + s.ligand_atoms.size();
  const std::size_t n_tokens = s.residue_count() + s.ligand_heavy_atom_count();
  if (v.values.size() == n_atoms) {
    v.granularity = PlddtGranularity::PerAtom;
  } else if (v.values.size() == n_tokens) {
    v.granularity = PlddtGranularity::PerToken;
  } else {
    throw LengthMismatch("pLDDT vector length " + std::to_string(v.values.size()) +
                         " matches neither atom count " + std::to_string(n_atoms) +
                         " nor token count " + std::to_string(n_tokens));
  }
  return v;
}

RegionPlddt region_plddt(const PlddtVector& v, const geometry::RegionSelection& sel,
                         const structio::ComplexStructure& s) {
  RegionPlddt out;
  double lig_sum = 0, pocket_sum = 0, shell_sum = 0;
  std::size_t lig_n = 0, pocket_n = 0, shell_n = 0;

  if (v.granularity == PlddtGranularity::PerAtom) {
    const std::size_t expected = s.polymer_atom_count() + s.ligand_atoms.size();
    if (v.values.size() != expected)
      throw LengthMismatch("pLDDT vector not aligned to structure atoms");
    std::size_t idx = 0;
    for (const auto& chain : s.polymer_chains) {
      for (const auto& res : chain.residues) {
        const structio::ResidueKey key{chain.id, res.seq, res.insertion_code};
        const bool in_pocket = sel.pocket.count(key) > 0;
        const bool in_shell = sel.shell.count(key) > 0;
        for (std::size_t a = 0; a < res.atoms.size(); ++a, ++idx) {
          if (in_pocket) {
            pocket_sum += v.values[idx];
            ++pocket_n;
          } else if (in_shell) {
            shell_sum += v.values[idx];
            ++shell_n;
          }
        }
      }
    }
    for (const auto& atom : s.ligand_atoms) {
      if (!atom.is_hydrogen()) {
        lig_sum += v.values[idx];
        ++lig_n;
      }
      ++idx;
    }
  } else {
    const std::size_t expected = s.residue_count() + s.ligand_heavy_atom_count();
    if (v.values.size() != expected)
      throw LengthMismatch("pLDDT vector not aligned to structure tokens");
    std::size_t idx = 0;
    for (const auto& chain : s.polymer_chains) {
      for (const auto& res : chain.residues) {
        const structio::ResidueKey key{chain.id, res.seq, res.insertion_code};
        if (sel.pocket.count(key)) {
          pocket_sum += v.values[idx];
          ++pocket_n;
        } else if (sel.shell.count(key)) {
          shell_sum += v.values[idx];
          ++shell_n;
        }
        ++idx;
      }
    }
    for (; idx < v.values.size(); ++idx) {
      lig_sum += v.values[idx];
      ++lig_n;
    }
  }

  if (lig_n > 0) out.ligand = lig_sum / static_cast<double>(lig_n);
  if (pocket_n > 0) out.pocket = pocket_sum / static_cast<double>(pocket_n);
  if (shell_n > 0) out.shell = shell_sum / static_cast<double>(shell_n);
  return out;
}

bool is_high_confidence(const ConfidenceRecord& r, double threshold) {
  return r.confidence_score > threshold;
}

}  // namespace plcurate::confidence
