#include "plcurate/structio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace plcurate::structio {

namespace {

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return rtrim(s);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

// Columns are 1-based and inclusive, as in the PDB format description.
std::string_view field(std::string_view line, std::size_t first, std::size_t last) {
  if (line.size() < first) return {};
  return line.substr(first - 1, std::min(last, line.size()) - (first - 1));
}

int parse_int(std::string_view raw, std::size_t line_no, const char* what) {
  const std::string_view s = trim(raw);
  int value = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw MalformedRecord(line_no, std::string("cannot parse ") + what);
  return value;
}

double parse_double(std::string_view raw, std::size_t line_no, const char* what) {
  const std::string_view s = trim(raw);
  double value = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw MalformedRecord(line_no, std::string("cannot parse ") + what);
  return value;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Element fallback from the 4-character atom name (columns 13-16): two-letter
// symbols occupy column 13, one-letter names are indented, hydrogens may be
// prefixed with a digit ("1HB1").
std::string element_from_name(std::string_view raw_name) {
  const std::string_view name = trim(raw_name);
  if (name.size() >= 2 && std::isalpha(static_cast<unsigned char>(raw_name.empty() ? ' ' : raw_name[0]))) {
    const std::string two = chem::normalize_element(name.substr(0, 2));
    if (chem::is_valid_element(two)) return two;
  }
  for (char c : name)
    if (std::isalpha(static_cast<unsigned char>(c))) return chem::normalize_element({&c, 1});
  return {};
}

struct RawAtom {
  AtomRecord atom;
  std::size_t line_no;
  std::size_t order;  // position in file
};

AtomRecord parse_atom_line(std::string_view line, std::size_t line_no, bool hetero) {
  if (rtrim(line).size() < 54)
    throw MalformedRecord(line_no, "ATOM/HETATM record shorter than coordinate columns");

  AtomRecord a;
  a.is_hetero = hetero;
  a.serial = parse_int(field(line, 7, 11), line_no, "serial");
  a.name = std::string(trim(field(line, 13, 16)));
  const char alt = line.size() >= 17 ? line[16] : ' ';
  a.alt_loc = alt == ' ' ? '\0' : alt;
  a.residue_name = std::string(trim(field(line, 18, 20)));
  a.chain_id = line.size() >= 22 ? line[21] : ' ';
  a.residue_seq = parse_int(field(line, 23, 26), line_no, "residue number");
  const char icode = line.size() >= 27 ? line[26] : ' ';
  a.insertion_code = icode == ' ' ? '\0' : icode;
  a.position.x = parse_double(field(line, 31, 38), line_no, "x coordinate");
  a.position.y = parse_double(field(line, 39, 46), line_no, "y coordinate");
  a.position.z = parse_double(field(line, 47, 54), line_no, "z coordinate");
  if (!a.position.finite()) throw MalformedRecord(line_no, "non-finite coordinate");

  const std::string_view occ = trim(field(line, 55, 60));
  a.occupancy = occ.empty() ? 1.0 : parse_double(occ, line_no, "occupancy");
  const std::string_view temp = trim(field(line, 61, 66));
  a.temp_factor = temp.empty() ? 0.0 : parse_double(temp, line_no, "temperature factor");

  std::string element = chem::normalize_element(trim(field(line, 77, 78)));
  if (element.empty()) element = element_from_name(field(line, 13, 16));
  if (!chem::is_valid_element(element))
    throw MalformedRecord(line_no, "unknown element symbol");
  a.element = element;
  return a;
}

// Alternate-location resolution: one conformer per atom key, highest
// occupancy wins, ties go to the alphabetically first altLoc.
std::vector<RawAtom> resolve_alt_locs(std::vector<RawAtom> atoms) {
  using Key = std::tuple<char, int, char, std::string, std::string>;
  std::map<Key, std::size_t> best;  // key -> index into atoms
  std::set<std::tuple<char, int, char, std::string, std::string, char>> exact;
  std::vector<bool> keep(atoms.size(), false);

  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const AtomRecord& a = atoms[i].atom;
    if (!exact.insert({a.chain_id, a.residue_seq, a.insertion_code, a.residue_name, a.name,
                       a.alt_loc})
             .second)
      throw MalformedRecord(atoms[i].line_no, "duplicate atom record");
    const Key key{a.chain_id, a.residue_seq, a.insertion_code, a.residue_name, a.name};
    auto it = best.find(key);
    if (it == best.end()) {
      best[key] = i;
      keep[i] = true;
      continue;
    }
    const AtomRecord& b = atoms[it->second].atom;
    const bool better = a.occupancy > b.occupancy ||
                        (a.occupancy == b.occupancy && a.alt_loc != '\0' && b.alt_loc != '\0' &&
                         a.alt_loc < b.alt_loc);
    if (better) {
      keep[it->second] = false;
      keep[i] = true;
      it->second = i;
    }
  }

  std::vector<RawAtom> out;
  out.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (keep[i]) out.push_back(std::move(atoms[i]));
  return out;
}

}  // namespace

std::size_t ComplexStructure::polymer_atom_count() const {
  std::size_t n = 0;
  for (const auto& c : polymer_chains)
    for (const auto& r : c.residues) n += r.atoms.size();
  return n;
}

std::size_t ComplexStructure::residue_count() const {
  std::size_t n = 0;
  for (const auto& c : polymer_chains) n += c.residues.size();
  return n;
}

std::size_t ComplexStructure::ligand_heavy_atom_count() const {
  std::size_t n = 0;
  for (const auto& a : ligand_atoms)
    if (!a.is_hydrogen()) ++n;
  return n;
}

ComplexStructure parse_pdb(std::string_view text, std::string source_id,
                           const PdbParseOptions& options) {
  const auto lines = split_lines(text);

  std::set<std::string> skip_het;
  for (const auto& w : options.water_names) skip_het.insert(upper(w));
  for (const auto& ion : options.excluded_ions) skip_het.insert(upper(ion));

  std::vector<RawAtom> polymer_raw, ligand_raw;
  int model_index = 0;  // 0 until a MODEL record is seen
  bool done = false;

  for (std::size_t i = 0; i < lines.size() && !done; ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = lines[i];
    const std::string record = upper(trim(field(line, 1, 6)));
    if (record == "MODEL") {
      ++model_index;
    } else if (record == "END") {
      done = true;
    } else if (record == "ENDMDL") {
      if (model_index >= 1) model_index = 2;  // first model finished; skip the rest
    } else if (record == "ATOM" || record == "HETATM") {
      if (model_index >= 2) continue;  // only the first MODEL is read
      AtomRecord a = parse_atom_line(line, line_no, record == "HETATM");
      if (record == "HETATM" && skip_het.count(upper(a.residue_name))) continue;
      auto& bucket = record == "ATOM" ? polymer_raw : ligand_raw;
      bucket.push_back({std::move(a), line_no, bucket.size()});
    }
    // TER and all other records carry no coordinate payload here.
  }

  polymer_raw = resolve_alt_locs(std::move(polymer_raw));
  ligand_raw = resolve_alt_locs(std::move(ligand_raw));

  if (polymer_raw.empty() && ligand_raw.empty())
    throw EmptyStructure("no atoms in input");

  ComplexStructure s;
  s.source_id = std::move(source_id);

  std::map<char, std::size_t> chain_index;
  std::vector<std::map<std::pair<int, char>, std::size_t>> residue_index;
  for (auto& raw : polymer_raw) {
    AtomRecord& a = raw.atom;
    auto cit = chain_index.find(a.chain_id);
    if (cit == chain_index.end()) {
      cit = chain_index.emplace(a.chain_id, s.polymer_chains.size()).first;
      s.polymer_chains.push_back({a.chain_id, {}});
      residue_index.emplace_back();
    }
    Chain& chain = s.polymer_chains[cit->second];
    auto& rindex = residue_index[cit->second];
    const std::pair<int, char> rkey{a.residue_seq, a.insertion_code};
    auto rit = rindex.find(rkey);
    if (rit == rindex.end()) {
      rit = rindex.emplace(rkey, chain.residues.size()).first;
      chain.residues.push_back({a.residue_seq, a.insertion_code, a.residue_name, {}});
    }
    chain.residues[rit->second].atoms.push_back(std::move(a));
  }

  s.ligand_atoms.reserve(ligand_raw.size());
  for (auto& raw : ligand_raw) s.ligand_atoms.push_back(std::move(raw.atom));
  return s;
}

namespace {

void append_atom_line(std::string& out, const char* record, const AtomRecord& a) {
  if (a.serial > 99999 || a.serial < -9999) throw FieldOverflow("atom serial out of column range");
  if (a.residue_seq > 9999 || a.residue_seq < -999)
    throw FieldOverflow("residue number out of column range");

  char coord[3][16];
  const double xyz[3] = {a.position.x, a.position.y, a.position.z};
  for (int k = 0; k < 3; ++k) {
    const int len = std::snprintf(coord[k], sizeof coord[k], "%8.3f", xyz[k]);
    if (len != 8) throw FieldOverflow("coordinate exceeds 8-column field");
  }
  char occ[16], temp[16];
  if (std::snprintf(occ, sizeof occ, "%6.2f", a.occupancy) != 6)
    throw FieldOverflow("occupancy exceeds 6-column field");
  if (std::snprintf(temp, sizeof temp, "%6.2f", a.temp_factor) != 6)
    throw FieldOverflow("temperature factor exceeds 6-column field");

  // One-letter elements are indented to column 14 unless the name already
  // fills the field.
  std::string name = a.name.substr(0, 4);
  if (name.size() < 4 && a.element.size() == 1) name = " " + name;
  name.resize(4, ' ');

  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s%5d %s%c%3.3s %c%4d%c   %s%s%s%s%s          %2s\n",
                record, a.serial, name.c_str(), a.alt_loc ? a.alt_loc : ' ',
                a.residue_name.c_str(), a.chain_id, a.residue_seq,
                a.insertion_code ? a.insertion_code : ' ', coord[0], coord[1], coord[2], occ, temp,
                upper(a.element).c_str());
  out += buf;
}

}  // namespace

std::string write_pdb(const ComplexStructure& s) {
  std::string out;
  for (const auto& chain : s.polymer_chains) {
    for (const auto& res : chain.residues)
      for (const auto& atom : res.atoms) append_atom_line(out, "ATOM", atom);
    if (!chain.residues.empty()) out += "TER\n";
  }
  for (const auto& atom : s.ligand_atoms) append_atom_line(out, "HETATM", atom);
  out += "END\n";
  return out;
}

// ---------------------------------------------------------------------------
// SDF V2000

namespace {

struct SdfRecord {
  std::vector<std::string_view> lines;
  std::size_t first_line_no = 0;
};

std::vector<SdfRecord> split_sdf_records(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<SdfRecord> records;
  SdfRecord current;
  current.first_line_no = 1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]) == "$$$$") {
      records.push_back(std::move(current));
      current = SdfRecord{{}, i + 2};
      continue;
    }
    current.lines.push_back(lines[i]);
  }
  const bool blank_tail = std::all_of(current.lines.begin(), current.lines.end(),
                                      [](std::string_view l) { return trim(l).empty(); });
  if (!blank_tail) records.push_back(std::move(current));
  return records;
}

chem::MolecularGraph parse_v2000(const SdfRecord& rec) {
  if (rec.lines.size() < 4)
    throw MalformedCountsLine("record too short for a V2000 connection table");
  const std::size_t counts_line_no = rec.first_line_no + 3;
  const std::string_view counts = rec.lines[3];
  if (upper(counts).find("V3000") != std::string::npos)
    throw MalformedCountsLine("V3000 connection tables are not supported");

  int natoms = 0, nbonds = 0;
  try {
    natoms = parse_int(field(counts, 1, 3), counts_line_no, "atom count");
    nbonds = parse_int(field(counts, 4, 6), counts_line_no, "bond count");
  } catch (const MalformedRecord& e) {
    throw MalformedCountsLine(e.what());
  }
  if (natoms < 0 || nbonds < 0) throw MalformedCountsLine("negative block count");
  if (rec.lines.size() < 4 + static_cast<std::size_t>(natoms) + static_cast<std::size_t>(nbonds))
    throw MalformedRecord(counts_line_no, "record ends before declared atom/bond blocks");

  chem::MolecularGraph g;
  g.atoms.reserve(natoms);
  for (int i = 0; i < natoms; ++i) {
    const std::size_t line_no = counts_line_no + 1 + i;
    const std::string_view line = rec.lines[4 + i];
    chem::GraphAtom atom;
    atom.position.x = parse_double(field(line, 1, 10), line_no, "x coordinate");
    atom.position.y = parse_double(field(line, 11, 20), line_no, "y coordinate");
    atom.position.z = parse_double(field(line, 21, 30), line_no, "z coordinate");
    atom.element = chem::normalize_element(trim(field(line, 32, 34)));
    if (!chem::is_valid_element(atom.element))
      throw MalformedRecord(line_no, "unknown element symbol");
    const std::string_view chg = trim(field(line, 37, 39));
    if (!chg.empty()) {
      // Legacy charge codes; 4 marks a radical, not a charge.
      static constexpr int codes[8] = {0, 3, 2, 1, 0, -1, -2, -3};
      const int code = parse_int(chg, line_no, "charge code");
      if (code >= 0 && code < 8) atom.formal_charge = codes[code];
    }
    g.atoms.push_back(std::move(atom));
  }

  for (int i = 0; i < nbonds; ++i) {
    const std::size_t line_no = counts_line_no + 1 + natoms + i;
    const std::string_view line = rec.lines[4 + natoms + i];
    const int a = parse_int(field(line, 1, 3), line_no, "bond atom index");
    const int b = parse_int(field(line, 4, 6), line_no, "bond atom index");
    const int order = parse_int(field(line, 7, 9), line_no, "bond order");
    if (a < 1 || a > natoms || b < 1 || b > natoms)
      throw AtomIndexOutOfRange("bond references atom " + std::to_string(std::max(a, b)) +
                                " in a " + std::to_string(natoms) + "-atom block");
    if (order < 1 || order > 4) throw MalformedRecord(line_no, "unsupported bond order");
    g.bonds.push_back({a - 1, b - 1, static_cast<chem::BondOrder>(order)});
  }

  bool charges_reset = false;
  for (std::size_t i = 4 + natoms + nbonds; i < rec.lines.size(); ++i) {
    const std::string_view line = rec.lines[i];
    const std::size_t line_no = rec.first_line_no + i;
    if (line.rfind("M  END", 0) == 0) break;
    if (line.rfind("M  CHG", 0) != 0) continue;
    std::istringstream ss{std::string(line.substr(6))};
    int count = 0;
    if (!(ss >> count)) throw MalformedRecord(line_no, "cannot parse M CHG count");
    if (!charges_reset) {
      for (auto& atom : g.atoms) atom.formal_charge = 0;  // M CHG supersedes atom-block codes
      charges_reset = true;
    }
    for (int k = 0; k < count; ++k) {
      int idx = 0, value = 0;
      if (!(ss >> idx >> value)) throw MalformedRecord(line_no, "truncated M CHG entry");
      if (idx < 1 || idx > natoms)
        throw AtomIndexOutOfRange("M CHG references atom " + std::to_string(idx));
      g.atoms[idx - 1].formal_charge = value;
    }
  }

  g.validate();
  return g;
}

}  // namespace

std::vector<chem::MolecularGraph> parse_sdf(std::string_view text) {
  std::vector<chem::MolecularGraph> out;
  for (const auto& rec : split_sdf_records(text)) out.push_back(parse_v2000(rec));
  return out;
}

std::vector<std::string> sdf_record_titles(std::string_view text) {
  std::vector<std::string> titles;
  for (const auto& rec : split_sdf_records(text))
    titles.push_back(rec.lines.empty() ? std::string() : std::string(trim(rec.lines[0])));
  return titles;
}

ChainClass classify_chains(const ComplexStructure& s) {
  std::size_t populated = 0;
  for (const auto& c : s.polymer_chains)
    if (!c.residues.empty()) ++populated;
  if (populated == 0) throw NoPolymer("structure has no polymer chains");
  return populated == 1 ? ChainClass::SingleChain : ChainClass::MultiChain;
}

std::string to_string(ChainClass c) {
  return c == ChainClass::SingleChain ? "single_chain" : "multi_chain";
}

std::optional<ChainClass> chain_class_from_string(std::string_view s) {
  if (s == "single_chain") return ChainClass::SingleChain;
  if (s == "multi_chain") return ChainClass::MultiChain;
  return std::nullopt;
}

std::optional<chem::MolecularGraph> pose_ligand_graph(const ComplexStructure& s) {
  if (!s.ligand_graph) return std::nullopt;
  chem::MolecularGraph heavy = s.ligand_graph->heavy_copy();
  std::vector<const AtomRecord*> pose;
  for (const auto& a : s.ligand_atoms)
    if (!a.is_hydrogen()) pose.push_back(&a);
  if (heavy.atoms.size() != pose.size()) return std::nullopt;
  for (std::size_t i = 0; i < heavy.atoms.size(); ++i) {
    if (heavy.atoms[i].element != pose[i]->element) return std::nullopt;
    heavy.atoms[i].position = pose[i]->position;
  }
  return heavy;
}

}  // namespace plcurate::structio
