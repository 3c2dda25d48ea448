#include "plcurate/chem.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

namespace plcurate::chem {

namespace {

constexpr std::array<const char*, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
    "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
    "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

const std::unordered_map<std::string_view, int>& element_index() {
  static const auto* map = [] {
    auto* m = new std::unordered_map<std::string_view, int>();
    for (std::size_t i = 0; i < kElements.size(); ++i) (*m)[kElements[i]] = static_cast<int>(i) + 1;
    return m;
  }();
  return *map;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

int atomic_number(std::string_view symbol) {
  const auto& idx = element_index();
  auto it = idx.find(symbol);
  return it == idx.end() ? 0 : it->second;
}

bool is_valid_element(std::string_view symbol) { return atomic_number(symbol) != 0; }

std::string normalize_element(std::string_view raw) {
  std::string out;
  for (char c : raw)
    if (c != ' ' && c != '\t') out.push_back(c);
  if (out.empty()) return out;
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  for (std::size_t i = 1; i < out.size(); ++i)
    out[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[i])));
  return out;
}

// ---------------------------------------------------------------------------
// MolecularGraph

void MolecularGraph::validate() const {
  const int n = static_cast<int>(atoms.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& b : bonds) {
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n)
      throw InvalidGraph("bond endpoint out of range");
    if (b.a == b.b) throw InvalidGraph("self-bond");
    auto key = std::minmax(b.a, b.b);
    if (!seen.insert({key.first, key.second}).second) throw InvalidGraph("duplicate bond");
  }
}

std::size_t MolecularGraph::heavy_atom_count() const {
  std::size_t n = 0;
  for (const auto& a : atoms)
    if (!is_hydrogen(a.element)) ++n;
  return n;
}

MolecularGraph MolecularGraph::heavy_copy() const {
  MolecularGraph out;
  std::vector<int> remap(atoms.size(), -1);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (is_hydrogen(atoms[i].element)) continue;
    remap[i] = static_cast<int>(out.atoms.size());
    out.atoms.push_back(atoms[i]);
  }
  for (const auto& b : bonds) {
    if (remap[b.a] < 0 || remap[b.b] < 0) continue;
    out.bonds.push_back({remap[b.a], remap[b.b], b.order});
  }
  return out;
}

std::vector<bool> ring_atoms(const MolecularGraph& g) {
  const int n = static_cast<int>(g.atoms.size());
  const int m = static_cast<int>(g.bonds.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbour, bond id)
  for (int e = 0; e < m; ++e) {
    adj[g.bonds[e].a].push_back({g.bonds[e].b, e});
    adj[g.bonds[e].b].push_back({g.bonds[e].a, e});
  }

  std::vector<bool> bridge(m, false);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;

  struct Frame {
    int v;
    int parent_edge;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (int s = 0; s < n; ++s) {
    if (disc[s] >= 0) continue;
    disc[s] = low[s] = timer++;
    stack.push_back({s, -1, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.v].size()) {
        auto [u, eid] = adj[f.v][f.next++];
        if (eid == f.parent_edge) continue;
        if (disc[u] >= 0) {
          low[f.v] = std::min(low[f.v], disc[u]);
        } else {
          disc[u] = low[u] = timer++;
          stack.push_back({u, eid, 0});
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& p = stack.back();
          low[p.v] = std::min(low[p.v], low[done.v]);
          if (low[done.v] > disc[p.v]) bridge[done.parent_edge] = true;
        }
      }
    }
  }

  std::vector<bool> in_ring(n, false);
  for (int e = 0; e < m; ++e) {
    if (bridge[e]) continue;
    in_ring[g.bonds[e].a] = true;
    in_ring[g.bonds[e].b] = true;
  }
  return in_ring;
}

// ---------------------------------------------------------------------------
// Whitelist

WhitelistResult element_whitelist_check(const MolecularGraph& g) {
  static const std::set<std::string_view> allowed = {"H", "B",  "C", "N", "O", "F",
                                                     "P", "S",  "Cl", "Br", "I"};
  WhitelistResult r;
  for (const auto& a : g.atoms) {
    if (allowed.count(a.element)) continue;
    r.pass = false;
    if (std::find(r.offenders.begin(), r.offenders.end(), a.element) == r.offenders.end())
      r.offenders.push_back(a.element);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fingerprints

int Fingerprint::popcount() const {
  int n = 0;
  for (auto w : words) n += __builtin_popcountll(w);
  return n;
}

std::string Fingerprint::to_hex() const {
  static const char digits[] = "0123456789abcdef";
  const int bytes = width / 8;
  std::string out;
  out.reserve(2 * bytes);
  for (int k = 0; k < bytes; ++k) {
    const auto byte = static_cast<unsigned>((words[k / 8] >> (8 * (k % 8))) & 0xFF);
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 0xF]);
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error("invalid hex digit in fingerprint");
  };
  if (hex.size() % 2 != 0) throw Error("fingerprint hex length must be even");
  Fingerprint fp(static_cast<int>(hex.size()) * 4);
  for (std::size_t k = 0; k * 2 < hex.size(); ++k) {
    const auto byte = static_cast<std::uint64_t>((nibble(hex[2 * k]) << 4) | nibble(hex[2 * k + 1]));
    fp.words[k / 8] |= byte << (8 * (k % 8));
  }
  return fp;
}

Fingerprint morgan_fingerprint(const MolecularGraph& g, int radius, int width) {
  const MolecularGraph heavy = g.heavy_copy();
  const int n = static_cast<int>(heavy.atoms.size());
  if (n == 0) throw EmptyMolecule("molecule has no heavy atoms");
  heavy.validate();

  const int m = static_cast<int>(heavy.bonds.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbour, bond id)
  for (int e = 0; e < m; ++e) {
    adj[heavy.bonds[e].a].push_back({heavy.bonds[e].b, e});
    adj[heavy.bonds[e].b].push_back({heavy.bonds[e].a, e});
  }
  const std::vector<bool> in_ring = ring_atoms(heavy);

  Fingerprint fp(width);
  const auto w = static_cast<std::uint64_t>(width);

  std::vector<std::uint64_t> inv(n);
  for (int i = 0; i < n; ++i) {
    std::uint64_t h = mix(0, static_cast<std::uint64_t>(atomic_number(heavy.atoms[i].element)));
    h = mix(h, static_cast<std::uint64_t>(adj[i].size()));
    h = mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(heavy.atoms[i].formal_charge)));
    h = mix(h, in_ring[i] ? 1 : 0);
    inv[i] = h;
    fp.set(h % w);
  }

  using Env = std::vector<std::uint64_t>;  // bond-index bitset
  const std::size_t env_words = (m + 63) / 64;
  std::vector<Env> env(n, Env(env_words, 0));
  std::set<Env> seen;
  std::vector<bool> dead(n, false);
  for (int i = 0; i < n; ++i)
    if (adj[i].empty()) dead[i] = true;

  for (int round = 1; round <= radius; ++round) {
    std::vector<Env> next_env = env;
    std::vector<std::uint64_t> next_inv = inv;
    // (invariant, env, atom) sorted so that for equal environments the
    // smallest invariant is emitted; that keeps the bits independent of how
    // the atoms happen to be numbered.
    std::vector<std::tuple<std::uint64_t, Env, int>> emitted;
    std::vector<std::pair<int, std::uint64_t>> nbrs;
    for (int i = 0; i < n; ++i) {
      if (dead[i]) continue;
      nbrs.clear();
      for (auto [u, eid] : adj[i]) {
        next_env[i][eid >> 6] |= 1ULL << (eid & 63);
        for (std::size_t k = 0; k < env_words; ++k) next_env[i][k] |= env[u][k];
        nbrs.push_back({static_cast<int>(heavy.bonds[eid].order), inv[u]});
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::uint64_t h = mix(0, static_cast<std::uint64_t>(round));
      h = mix(h, inv[i]);
      for (auto [code, ninv] : nbrs) {
        h = mix(h, static_cast<std::uint64_t>(code));
        h = mix(h, ninv);
      }
      next_inv[i] = h;
      emitted.push_back({h, next_env[i], i});
    }
    std::sort(emitted.begin(), emitted.end(),
              [](const auto& a, const auto& b) {
                if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
                return std::get<1>(a) < std::get<1>(b);
              });
    for (const auto& [h, e, i] : emitted) {
      if (seen.count(e)) {
        dead[i] = true;
      } else {
        seen.insert(e);
        fp.set(h % w);
      }
    }
    env.swap(next_env);
    inv.swap(next_inv);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width != b.width) throw WidthMismatch("fingerprint widths differ");
  std::uint64_t num = 0, den = 0;
  for (std::size_t k = 0; k < a.words.size(); ++k) {
    num += __builtin_popcountll(a.words[k] & b.words[k]);
    den += __builtin_popcountll(a.words[k] | b.words[k]);
  }
  if (den == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

// ---------------------------------------------------------------------------
// Isomorphism search

namespace {

struct AdjEntry {
  int nbr;
  int order;
};

struct Pattern {
  std::vector<std::vector<AdjEntry>> adj;
  std::vector<int> color;
};

// Shared Weisfeiler-Leman style refinement over both graphs so colours are
// comparable across them.
std::pair<Pattern, Pattern> build_patterns(const MolecularGraph& a, const MolecularGraph& b,
                                           bool use_order) {
  auto make_adj = [use_order](const MolecularGraph& g) {
    std::vector<std::vector<AdjEntry>> adj(g.atoms.size());
    for (const auto& bond : g.bonds) {
      const int code = use_order ? static_cast<int>(bond.order) : 0;
      adj[bond.a].push_back({bond.b, code});
      adj[bond.b].push_back({bond.a, code});
    }
    return adj;
  };

  Pattern pa{make_adj(a), {}}, pb{make_adj(b), {}};
  const int na = static_cast<int>(a.atoms.size());
  const int nb = static_cast<int>(b.atoms.size());
  pa.color.resize(na);
  pb.color.resize(nb);

  std::map<std::string, int> init;
  for (int i = 0; i < na; ++i) pa.color[i] = init.emplace(a.atoms[i].element, static_cast<int>(init.size())).first->second;
  for (int i = 0; i < nb; ++i) pb.color[i] = init.emplace(b.atoms[i].element, static_cast<int>(init.size())).first->second;

  int prev_count = static_cast<int>(init.size());
  for (int iter = 0; iter < na + 1; ++iter) {
    using Key = std::pair<int, std::vector<std::pair<int, int>>>;
    std::map<Key, int> table;
    auto recolor = [&table](Pattern& p) {
      std::vector<int> next(p.color.size());
      for (std::size_t i = 0; i < p.color.size(); ++i) {
        Key key{p.color[i], {}};
        key.second.reserve(p.adj[i].size());
        for (const auto& e : p.adj[i]) key.second.push_back({e.order, p.color[e.nbr]});
        std::sort(key.second.begin(), key.second.end());
        next[i] = table.emplace(std::move(key), static_cast<int>(table.size())).first->second;
      }
      p.color = std::move(next);
    };
    recolor(pa);
    recolor(pb);
    const int count = static_cast<int>(table.size());
    if (count == prev_count) break;
    prev_count = count;
  }
  return {std::move(pa), std::move(pb)};
}

struct MatchSearch {
  const Pattern& pa;
  const Pattern& pb;
  std::size_t limit;
  std::chrono::steady_clock::time_point deadline;
  bool has_deadline = false;

  std::vector<int> order;            // order in which atoms of A are mapped
  std::vector<int> mapping;          // A index -> B index or -1
  std::vector<int> reverse;          // B index -> A index or -1
  std::vector<std::vector<int>> out;
  bool truncated = false;
  std::uint64_t nodes = 0;

  bool expired() {
    if (!has_deadline) return false;
    if ((nodes & 1023) != 0) return false;
    return std::chrono::steady_clock::now() >= deadline;
  }

  bool consistent(int a, int b) const {
    if (pa.color[a] != pb.color[b]) return false;
    int mapped_a = 0;
    for (const auto& e : pa.adj[a]) {
      const int img = mapping[e.nbr];
      if (img < 0) continue;
      ++mapped_a;
      bool found = false;
      for (const auto& f : pb.adj[b]) {
        if (f.nbr == img && f.order == e.order) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    int mapped_b = 0;
    for (const auto& f : pb.adj[b])
      if (reverse[f.nbr] >= 0) ++mapped_b;
    return mapped_a == mapped_b;
  }

  bool search(std::size_t depth) {  // returns false when enumeration must stop
    if (depth == order.size()) {
      out.push_back(mapping);
      return out.size() < limit;
    }
    ++nodes;
    if (expired()) {
      truncated = true;
      return false;
    }
    const int a = order[depth];
    const int nb = static_cast<int>(pb.adj.size());
    for (int b = 0; b < nb; ++b) {
      if (reverse[b] >= 0 || !consistent(a, b)) continue;
      mapping[a] = b;
      reverse[b] = a;
      const bool keep_going = search(depth + 1);
      mapping[a] = -1;
      reverse[b] = -1;
      if (!keep_going) return false;
    }
    return true;
  }
};

std::vector<int> make_order(const Pattern& pa) {
  const int n = static_cast<int>(pa.adj.size());
  std::vector<int> class_size(n, 0);
  {
    std::map<int, int> counts;
    for (int c : pa.color) counts[c]++;
    for (int i = 0; i < n; ++i) class_size[i] = counts[pa.color[i]];
  }
  std::vector<int> order;
  std::vector<bool> placed(n, false);
  std::vector<int> anchored(n, 0);  // neighbours already placed
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (placed[i]) continue;
      if (best < 0) {
        best = i;
        continue;
      }
      auto key = [&](int v) { return std::make_tuple(-anchored[v], class_size[v], v); };
      if (key(i) < key(best)) best = i;
    }
    placed[best] = true;
    order.push_back(best);
    for (const auto& e : pa.adj[best])
      if (!placed[e.nbr]) anchored[e.nbr]++;
  }
  return order;
}

}  // namespace

AutomorphismResult graph_automorphisms(const MolecularGraph& g, const AutomorphismOptions& opts) {
  g.validate();
  AutomorphismResult result;
  if (g.atoms.empty()) {
    result.permutations.push_back({});
    return result;
  }
  auto [pa, pb] = build_patterns(g, g, true);
  // Enumerate one past the limit so a group of exactly `limit` automorphisms
  // is not reported as truncated.
  MatchSearch search{pa, pb, opts.limit + 1, {}, false, make_order(pa),
                     std::vector<int>(g.atoms.size(), -1), std::vector<int>(g.atoms.size(), -1),
                     {}, false, 0};
  if (opts.time_budget.count() > 0) {
    search.deadline = std::chrono::steady_clock::now() + opts.time_budget;
    search.has_deadline = true;
  }
  search.search(0);
  result.truncated = search.truncated || search.out.size() > opts.limit;
  if (search.out.size() > opts.limit) search.out.resize(opts.limit);
  result.permutations = std::move(search.out);

  // Candidates are tried in ascending index order, so the identity (the
  // lexicographically smallest automorphism) is always found first.
  return result;
}

std::optional<std::vector<int>> find_isomorphism(const MolecularGraph& a, const MolecularGraph& b,
                                                 bool match_bond_order) {
  if (a.atoms.size() != b.atoms.size() || a.bonds.size() != b.bonds.size()) return std::nullopt;
  a.validate();
  b.validate();
  if (a.atoms.empty()) return std::vector<int>{};
  auto [pa, pb] = build_patterns(a, b, match_bond_order);
  {
    std::map<int, int> ha, hb;
    for (int c : pa.color) ha[c]++;
    for (int c : pb.color) hb[c]++;
    if (ha != hb) return std::nullopt;
  }
  MatchSearch search{pa, pb, 1, {}, false, make_order(pa),
                     std::vector<int>(a.atoms.size(), -1), std::vector<int>(b.atoms.size(), -1),
                     {}, false, 0};
  search.search(0);
  if (search.out.empty()) return std::nullopt;
  return search.out.front();
}

}  // namespace plcurate::chem
