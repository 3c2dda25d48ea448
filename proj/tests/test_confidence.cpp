#include <doctest.h>

#include "helpers.hpp"
#include "plcurate/confidence.hpp"

using namespace plcurate;
using namespace testutil;

TEST_CASE("load_confidence") {
  const auto r = confidence::load_confidence(
      R"({"confidence_score":0.95,"ptm":0.9,"iptm":0.88,"ligand_iptm":0.8,
          "protein_iptm":0.85,"complex_plddt":86.5,"complex_pde":1.2,
          "complex_ipde":2.1,"hybrid_score":1.48,"unknown_extra":42})");
  CHECK(r.confidence_score == doctest::Approx(0.95));
  CHECK(r.ptm == doctest::Approx(0.9));
  CHECK(r.iptm == doctest::Approx(0.88));
  CHECK(r.complex_plddt == doctest::Approx(86.5));
  CHECK(r.hybrid_score == doctest::Approx(1.48));
  CHECK_FALSE(r.ligand_plddt.has_value());
  CHECK_FALSE(r.dope_score.has_value());
}

TEST_CASE("load_confidence error paths") {
  CHECK_THROWS_AS(confidence::load_confidence(R"({"ptm":0.9})"),
                  confidence::MissingRequiredField);
  CHECK_THROWS_AS(confidence::load_confidence(R"({"confidence_score":1.3})"),
                  confidence::RangeViolation);
  CHECK_THROWS_AS(confidence::load_confidence(R"({"confidence_score":-0.1})"),
                  confidence::RangeViolation);
  CHECK_THROWS_AS(confidence::load_confidence(R"({"confidence_score":"high"})"),
                  confidence::MalformedNumber);
  CHECK_THROWS_AS(confidence::load_confidence(R"({"confidence_score":0.5,"ptm":7})"),
                  confidence::RangeViolation);
  CHECK_THROWS_AS(confidence::load_confidence("not json at all"), confidence::MalformedNumber);
}

TEST_CASE("confidence json round trip") {
  confidence::ConfidenceRecord r;
  r.confidence_score = 0.91;
  r.ptm = 0.8;
  r.hybrid_score = 1.3;
  const auto j = confidence::confidence_to_json(r);
  const auto back = confidence::confidence_from_json(j);
  CHECK(back.confidence_score == r.confidence_score);
  CHECK(back.ptm == r.ptm);
  CHECK(back.hybrid_score == r.hybrid_score);
  CHECK_FALSE(back.iptm.has_value());
}

TEST_CASE("is_high_confidence boundary is strict") {
  confidence::ConfidenceRecord r;
  r.confidence_score = 0.91;
  CHECK(confidence::is_high_confidence(r));
  r.confidence_score = 0.90;
  CHECK_FALSE(confidence::is_high_confidence(r));
  r.confidence_score = 0.0;
  CHECK_FALSE(confidence::is_high_confidence(r));
}

namespace {

// Structure with known regions: residues at x = 0, 3, 6, ... and a single
// carbon ligand at the origin area so pocket membership is easy to stage.
structio::ComplexStructure plddt_fixture() {
  structio::ComplexStructure s;
  structio::Chain chain{'A', {}};
  chain.residues.push_back(make_residue(1, {0, 2, 0}));    // pocket (d ~ 2)
  chain.residues.push_back(make_residue(2, {0, 7, 0}));    // shell (d ~ 7)
  chain.residues.push_back(make_residue(3, {0, 20, 0}));   // neither
  s.polymer_chains.push_back(chain);
  structio::AtomRecord lig;
  lig.name = "C1";
  lig.element = "C";
  lig.residue_name = "LIG";
  lig.chain_id = 'L';
  lig.residue_seq = 900;
  lig.position = {0, 0, 0};
  lig.is_hetero = true;
  s.ligand_atoms.push_back(lig);
  return s;
}

}  // namespace

TEST_CASE("plddt loading and granularity inference") {
  const auto s = plddt_fixture();  // 9 polymer atoms + 1 ligand atom; 3 residues + 1 token
  const auto per_atom = confidence::load_plddt("[1,2,3,4,5,6,7,8,9,10]", s);
  CHECK(per_atom.granularity == confidence::PlddtGranularity::PerAtom);
  CHECK(per_atom.values.size() == 10);

  const auto per_token = confidence::load_plddt("80 70 60 50", s);
  CHECK(per_token.granularity == confidence::PlddtGranularity::PerToken);
  CHECK(per_token.values.size() == 4);

  CHECK_THROWS_AS(confidence::load_plddt("1 2 3", s), confidence::LengthMismatch);
  CHECK_THROWS_AS(confidence::load_plddt("[1, \"x\"]", plddt_fixture()),
                  confidence::MalformedNumber);
}

TEST_CASE("region plddt means") {
  const auto s = plddt_fixture();
  const auto sel = geometry::select_pocket_and_shell(s);
  REQUIRE(sel.pocket.count({'A', 1, '\0'}) == 1);
  REQUIRE(sel.shell.count({'A', 2, '\0'}) == 1);

  SUBCASE("uniform vector gives uniform means") {
    confidence::PlddtVector v;
    v.values.assign(10, 80.0);
    v.granularity = confidence::PlddtGranularity::PerAtom;
    const auto r = confidence::region_plddt(v, sel, s);
    CHECK(r.ligand == doctest::Approx(80.0));
    CHECK(r.pocket == doctest::Approx(80.0));
    CHECK(r.shell == doctest::Approx(80.0));
  }

  SUBCASE("per-token hand means") {
    confidence::PlddtVector v;
    v.values = {50.0, 60.0, 99.0, 80.0};  // res1 (pocket), res2 (shell), res3, ligand token
    v.granularity = confidence::PlddtGranularity::PerToken;
    const auto r = confidence::region_plddt(v, sel, s);
    CHECK(r.pocket == doctest::Approx(50.0));
    CHECK(r.shell == doctest::Approx(60.0));
    CHECK(r.ligand == doctest::Approx(80.0));
  }

  SUBCASE("per-atom hand means") {
    confidence::PlddtVector v;
    v.values = {10, 20, 30, 40, 50, 60, 1, 2, 3, 90};
    v.granularity = confidence::PlddtGranularity::PerAtom;
    const auto r = confidence::region_plddt(v, sel, s);
    CHECK(r.pocket == doctest::Approx(20.0));  // atoms 10, 20, 30
    CHECK(r.shell == doctest::Approx(50.0));   // atoms 40, 50, 60
    CHECK(r.ligand == doctest::Approx(90.0));
  }
}

TEST_CASE("empty shell gives an absent value, not an error") {
  auto s = plddt_fixture();
  // Move the shell residue out of range.
  s.polymer_chains[0].residues[1] = make_residue(2, {0, 30, 0});
  const auto sel = geometry::select_pocket_and_shell(s);
  CHECK(sel.shell.empty());

  confidence::PlddtVector v;
  v.values.assign(10, 70.0);
  v.granularity = confidence::PlddtGranularity::PerAtom;
  const auto r = confidence::region_plddt(v, sel, s);
  CHECK(r.pocket.has_value());
  CHECK_FALSE(r.shell.has_value());
}

TEST_CASE("region means are bounded by the vector extrema") {
  SplitMix64 rng(17);
  const auto s = plddt_fixture();
  const auto sel = geometry::select_pocket_and_shell(s);
  for (int trial = 0; trial < 50; ++trial) {
    confidence::PlddtVector v;
    double lo = 101, hi = -1;
    for (int i = 0; i < 10; ++i) {
      const double x = rng.uniform() * 100.0;
      v.values.push_back(x);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    v.granularity = confidence::PlddtGranularity::PerAtom;
    const auto r = confidence::region_plddt(v, sel, s);
    for (const auto& m : {r.ligand, r.pocket, r.shell}) {
      if (!m) continue;
      CHECK(*m >= lo - 1e-12);
      CHECK(*m <= hi + 1e-12);
    }
  }
}

TEST_CASE("concatenated-region mean equals the count-weighted combination") {
  const auto s = plddt_fixture();
  const auto sel = geometry::select_pocket_and_shell(s);
  confidence::PlddtVector v;
  v.values = {10, 20, 30, 45, 55, 65, 1, 2, 3, 90};
  v.granularity = confidence::PlddtGranularity::PerAtom;
  const auto r = confidence::region_plddt(v, sel, s);
  REQUIRE(r.pocket.has_value());
  REQUIRE(r.shell.has_value());

  // Pocket has 3 atoms, shell has 3: combined mean over both regions.
  const double combined = (3.0 * *r.pocket + 3.0 * *r.shell) / 6.0;
  const double direct = (10 + 20 + 30 + 45 + 55 + 65) / 6.0;
  CHECK(combined == doctest::Approx(direct).epsilon(1e-12));
}
