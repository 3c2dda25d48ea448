#include <doctest.h>
#include <fstream>

#include "helpers.hpp"
#include "plcurate/plausibility.hpp"

using namespace plcurate;
using namespace testutil;

TEST_CASE("radius table basics") {
  const auto& t = plausibility::RadiusTable::builtin();
  CHECK(t.covalent("C") == doctest::Approx(0.76));
  CHECK(t.vdw("C") == doctest::Approx(1.70));
  CHECK(t.covalent("Xe") == doctest::Approx(1.40));
  // Unlisted elements fall back to defaults.
  CHECK(t.covalent("Og") == doctest::Approx(1.50));
  CHECK(t.vdw("Og") == doctest::Approx(2.00));
}

#ifdef PLCURATE_DATA_DIR
TEST_CASE("shipped radius table matches the builtin values") {
  std::ifstream in(std::string(PLCURATE_DATA_DIR) + "/atomic_radii.csv");
  REQUIRE(in.good());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto shipped = plausibility::RadiusTable::from_csv(text);
  const auto& builtin = plausibility::RadiusTable::builtin();
  for (const char* el : {"H", "C", "N", "O", "S", "Cl", "Br", "I", "Fe", "Zn", "K"}) {
    CHECK(shipped.covalent(el) == doctest::Approx(builtin.covalent(el)));
    CHECK(shipped.vdw(el) == doctest::Approx(builtin.vdw(el)));
  }
}
#endif

TEST_CASE("radius table csv round trip") {
  const auto& builtin = plausibility::RadiusTable::builtin();
  const auto parsed = plausibility::RadiusTable::from_csv(builtin.to_csv());
  CHECK(parsed.covalent("C") == builtin.covalent("C"));
  CHECK(parsed.vdw("K") == builtin.vdw("K"));
  CHECK(parsed.max_vdw() == builtin.max_vdw());

  CHECK_THROWS_AS(plausibility::RadiusTable::from_csv("element,covalent_radius,vdw_radius\n"),
                  Error);
  CHECK_THROWS_AS(plausibility::RadiusTable::from_csv("C,abc,1.7\n"), Error);
  CHECK_THROWS_AS(plausibility::RadiusTable::from_csv("Zz,1.0,1.7\n"), Error);
}

TEST_CASE("bond length check") {
  // C-C at 1.54 vs expected 1.52: 1.3% deviation, fine.
  auto ok = linear_chain({"C", "C"}, 1.54);
  CHECK(plausibility::check_bond_lengths(ok).empty());

  // C-C at 2.5: ~64% deviation.
  auto stretched = linear_chain({"C", "C"}, 2.5);
  const auto violations = plausibility::check_bond_lengths(stretched);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].observed == doctest::Approx(2.5));
  CHECK(violations[0].expected == doctest::Approx(1.52));

  // No bonds, no violations.
  chem::MolecularGraph lone;
  lone.atoms.push_back({"C", 0, {1, 1, 1}});
  CHECK(plausibility::check_bond_lengths(lone).empty());

  // All-origin coordinates on a bonded graph are rejected.
  chem::MolecularGraph flat = linear_chain({"C", "C"}, 0.0);
  CHECK_THROWS_AS(plausibility::check_bond_lengths(flat), plausibility::MissingCoordinates);
}

TEST_CASE("clash detection") {
  auto s = synthetic_complex();
  CHECK(plausibility::check_clashes(s).empty());

  // Drop one ligand atom next to a backbone atom: C/C threshold is
  // 0.75 * (1.70 + 1.70) = 2.55.
  s.ligand_atoms[0].position = s.polymer_chains[0].residues[0].atoms[1].position + Vec3{1.0, 0, 0};
  const auto clashes = plausibility::check_clashes(s);
  CHECK(!clashes.empty());
  bool found = false;
  for (const auto& c : clashes)
    if (c.ligand_atom == 0 && c.distance == doctest::Approx(1.0)) found = true;
  CHECK(found);

  // Carbon pair at 3.0 A sits above the 2.55 A threshold: no clash.
  structio::ComplexStructure pair;
  structio::Chain chain{'A', {}};
  chain.residues.push_back(make_residue(1, {0, 0, 0}));
  chain.residues[0].atoms.resize(1);
  chain.residues[0].atoms[0].position = {0, 0, 0};
  pair.polymer_chains.push_back(chain);
  structio::AtomRecord lig_c;
  lig_c.name = "C1";
  lig_c.element = "C";
  lig_c.residue_name = "LIG";
  lig_c.chain_id = 'L';
  lig_c.residue_seq = 900;
  lig_c.is_hetero = true;
  lig_c.position = {3.0, 0, 0};
  pair.ligand_atoms.push_back(lig_c);
  CHECK(plausibility::check_clashes(pair).empty());
  pair.ligand_atoms[0].position = {1.0, 0, 0};  // 1.0 < 2.55
  CHECK(plausibility::check_clashes(pair).size() == 1);

  auto no_lig = synthetic_complex();
  no_lig.ligand_atoms.clear();
  CHECK_THROWS_AS(plausibility::check_clashes(no_lig), structio::NoLigand);

  // Ligand but no protein: empty result, not an error.
  auto lonely = synthetic_complex();
  lonely.polymer_chains.clear();
  CHECK(plausibility::check_clashes(lonely).empty());
}

TEST_CASE("grid clash detection equals brute force") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_complex(rng, 25, 10, 18.0);
    const auto got = plausibility::check_clashes(s);

    // All-pairs reference.
    const auto& table = plausibility::RadiusTable::builtin();
    std::size_t expected = 0;
    s.for_each_polymer_atom([&](const auto&, const auto&, const auto& atom) {
      if (atom.is_hydrogen()) return;
      for (std::size_t i = 0; i < s.ligand_atoms.size(); ++i) {
        const auto& lig = s.ligand_atoms[i];
        if (lig.is_hydrogen()) continue;
        const double threshold = 0.75 * (table.vdw(atom.element) + table.vdw(lig.element));
        if (distance(atom.position, lig.position) < threshold) ++expected;
      }
    });
    CHECK(got.size() == expected);
  }
}

TEST_CASE("connectivity check") {
  const auto input = benzene();
  CHECK(plausibility::check_connectivity(input, input));

  // Stretch one ring atom far out: a bond drops from the inferred graph.
  auto distorted = benzene();
  distorted.atoms[0].position = {10, 0, 0};
  CHECK_FALSE(plausibility::check_connectivity(distorted, input));

  chem::MolecularGraph lone;
  lone.atoms.push_back({"C", 0, {0, 0, 0}});
  CHECK(plausibility::check_connectivity(lone, lone));
}

TEST_CASE("physical verdict is the conjunction of the three checks") {
  plausibility::PlausibilityReport r;
  CHECK(plausibility::physical_verdict(r));
  r.connectivity_preserved = false;
  CHECK_FALSE(plausibility::physical_verdict(r));
  r.connectivity_preserved = true;
  r.clash_pairs.push_back({});
  CHECK_FALSE(plausibility::physical_verdict(r));

  // Removing a violation never flips a passing verdict to failing.
  plausibility::PlausibilityReport with_violation;
  with_violation.bond_length_violations.push_back({0, 1, 2.5, 1.52});
  const bool before = plausibility::physical_verdict(with_violation);
  with_violation.bond_length_violations.clear();
  CHECK(plausibility::physical_verdict(with_violation) >= before);
}

TEST_CASE("assess on a healthy complex") {
  const auto s = synthetic_complex();
  const auto report = plausibility::assess(s);
  CHECK(report.physical);
  CHECK(report.bond_length_violations.empty());
  CHECK(report.clash_pairs.empty());
  CHECK(report.connectivity_preserved);

  auto no_graph = s;
  no_graph.ligand_graph.reset();
  CHECK_THROWS_AS(plausibility::assess(no_graph), plausibility::MissingConnectionTable);
}

TEST_CASE("assess verdict invariant under rigid motion") {
  SplitMix64 rng(66);
  auto healthy = synthetic_complex();
  auto broken = synthetic_complex();
  broken.ligand_atoms[0].position =
      broken.polymer_chains[0].residues[0].atoms[1].position + Vec3{0.8, 0, 0};
  broken.ligand_graph->atoms[0].position = broken.ligand_atoms[0].position;

  for (int trial = 0; trial < 8; ++trial) {
    const auto motion = random_rigid(rng);
    auto h = healthy;
    auto b = broken;
    apply_to_structure(motion, h);
    apply_to_structure(motion, b);
    CHECK(plausibility::assess(h).physical);
    CHECK_FALSE(plausibility::assess(b).physical);
  }
}
