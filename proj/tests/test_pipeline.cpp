#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "corpus.hpp"
#include "plcurate/config.hpp"
#include "plcurate/pipeline.hpp"
#include "plcurate/triage.hpp"

using namespace plcurate;
using namespace testutil;

TEST_CASE("config TOML subset") {
  const std::string text =
      "# thresholds\n"
      "[thresholds]\n"
      "confidence_threshold = 0.85\n"
      "tanimoto_cutoff = 0.8\n"
      "similarity_bins = [0.0, 0.5, 1.0]\n"
      "workers = 4\n"
      "compute_plausibility = false\n"
      "radius_table_path = \"radii.csv\"\n";
  const auto cfg = config::load_config_toml(text);
  CHECK(cfg.confidence_threshold == doctest::Approx(0.85));
  CHECK(cfg.tanimoto_cutoff == doctest::Approx(0.8));
  CHECK(cfg.similarity_bins == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(cfg.workers == 4);
  CHECK_FALSE(cfg.compute_plausibility);
  CHECK(cfg.radius_table_path == "radii.csv");
  CHECK(cfg.pocket_rmsd_threshold == doctest::Approx(2.0));  // default untouched

  CHECK_THROWS_AS(config::load_config_toml("unknown_key = 1\n"), config::ConfigError);
  CHECK_THROWS_AS(config::load_config_toml("workers = \"four\"\n"), config::ConfigError);
  CHECK_THROWS_AS(config::load_config_toml("workers = 0\n"), config::ConfigError);
  CHECK_THROWS_AS(config::load_config_toml("confidence_threshold = 1.5\n"), config::ConfigError);
  CHECK_THROWS_AS(config::load_config_toml("similarity_bins = [0.5, 0.1]\n"),
                  config::ConfigError);
}

TEST_CASE("cmd_score annotates the corpus") {
  TempDir tmp("score");
  const auto corpus = build_corpus(tmp.path / "corpus");
  config::PipelineConfig cfg;

  const int rc = pipeline::cmd_score(cfg, corpus.manifest.string(), (tmp.path / "out").string());
  CHECK(rc == pipeline::kExitOk);

  const auto scored = triage::parse_manifest_jsonl(slurp(tmp.path / "out" / "scored.jsonl"));
  REQUIRE(scored.size() == corpus.entries.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& e = scored[i];
    const auto& expected = corpus.entries[i];
    CHECK(e.id == expected.id);
    REQUIRE(e.chain_class.has_value());
    CHECK((*e.chain_class == structio::ChainClass::MultiChain) == expected.multi_chain);
    REQUIRE(e.confidence.has_value());
    CHECK(e.confidence->confidence_score == doctest::Approx(expected.confidence_score));
    CHECK(e.confidence->ligand_plddt.has_value());
    CHECK(e.confidence->pocket_plddt.has_value());
    REQUIRE(e.physical.has_value());
    CHECK(*e.physical);
    CHECK(e.quality.has_value() == expected.has_ref);
    if (e.quality) {
      const bool expect_high = expected.ligand_shift < 2.0;
      CHECK((e.quality->pocket_rmsd < 2.0) == expect_high);
    }
  }
  CHECK(slurp(tmp.path / "out" / "errors.jsonl").empty());
  CHECK(!slurp(tmp.path / "out" / "scored.csv").empty());
}

TEST_CASE("cmd_score isolates per-entry failures") {
  TempDir tmp("isolate");
  const auto corpus = build_corpus(tmp.path / "corpus", 6);

  // Append an entry whose prediction file does not exist.
  std::string with_bad = slurp(corpus.manifest);
  with_bad += R"({"id":"zz_broken","pred_path":"/nonexistent/file.pdb"})" "\n";
  spit(tmp.path / "with_bad.jsonl", with_bad);

  config::PipelineConfig cfg;
  const int rc =
      pipeline::cmd_score(cfg, (tmp.path / "with_bad.jsonl").string(), (tmp.path / "a").string());
  CHECK(rc == pipeline::kExitOk);  // 1 of 7 failures is under the 50% threshold
  const int rc2 =
      pipeline::cmd_score(cfg, corpus.manifest.string(), (tmp.path / "b").string());
  CHECK(rc2 == pipeline::kExitOk);

  // Other rows are reproduced exactly.
  CHECK(slurp(tmp.path / "a" / "scored.jsonl") == slurp(tmp.path / "b" / "scored.jsonl"));

  const std::string errors = slurp(tmp.path / "a" / "errors.jsonl");
  CHECK(errors.find("zz_broken") != std::string::npos);
  CHECK(errors.find("prediction") != std::string::npos);
}

TEST_CASE("cmd_score exit codes") {
  TempDir tmp("exit");
  spit(tmp.path / "empty.jsonl", "");
  config::PipelineConfig cfg;
  CHECK(pipeline::cmd_score(cfg, (tmp.path / "empty.jsonl").string(),
                            (tmp.path / "out").string()) == pipeline::kExitBatchFailure);

  // All entries broken: failure share 1.0 > 0.5.
  spit(tmp.path / "bad.jsonl",
       R"({"id":"a","pred_path":"/nope1.pdb"})" "\n" R"({"id":"b","pred_path":"/nope2.pdb"})" "\n");
  CHECK(pipeline::cmd_score(cfg, (tmp.path / "bad.jsonl").string(),
                            (tmp.path / "out2").string()) == pipeline::kExitBatchFailure);
}

TEST_CASE("worker count does not change any output byte") {
  TempDir tmp("workers");
  const auto corpus = build_corpus(tmp.path / "corpus");

  config::PipelineConfig serial;
  serial.workers = 1;
  config::PipelineConfig parallel;
  parallel.workers = 8;

  CHECK(pipeline::cmd_score(serial, corpus.manifest.string(), (tmp.path / "w1").string()) ==
        pipeline::kExitOk);
  CHECK(pipeline::cmd_score(parallel, corpus.manifest.string(), (tmp.path / "w8").string()) ==
        pipeline::kExitOk);
  CHECK(slurp(tmp.path / "w1" / "scored.jsonl") == slurp(tmp.path / "w8" / "scored.jsonl"));
  CHECK(slurp(tmp.path / "w1" / "scored.csv") == slurp(tmp.path / "w8" / "scored.csv"));
  CHECK(slurp(tmp.path / "w1" / "errors.jsonl") == slurp(tmp.path / "w8" / "errors.jsonl"));
}

TEST_CASE("cmd_triage produces labels, sankey and stats reports") {
  TempDir tmp("triage");
  const auto corpus = build_corpus(tmp.path / "corpus");
  config::PipelineConfig cfg;
  REQUIRE(pipeline::cmd_score(cfg, corpus.manifest.string(), (tmp.path / "scored").string()) ==
          pipeline::kExitOk);

  const int rc = pipeline::cmd_triage(cfg, (tmp.path / "scored" / "scored.jsonl").string(),
                                      (tmp.path / "triage").string());
  CHECK(rc == pipeline::kExitOk);

  const std::string labels = slurp(tmp.path / "triage" / "labels.csv");
  CHECK(labels.find("id,single_chain,physical,high_conf,high_quality") == 0);
  // One line per entry plus header.
  CHECK(std::count(labels.begin(), labels.end(), '\n') ==
        static_cast<long>(corpus.entries.size()) + 1);

  const std::string sankey = slurp(tmp.path / "triage" / "sankey.csv");
  CHECK(sankey.find("All,Single-chain") != std::string::npos);
  CHECK(sankey.find("High-conf,High-quality") != std::string::npos);

  CHECK(!slurp(tmp.path / "triage" / "success_rates.csv").empty());
  CHECK(!slurp(tmp.path / "triage" / "confidence_quality_tau.csv").empty());

  // Rebuilding the sankey from labels.csv reproduces it byte for byte.
  REQUIRE(pipeline::cmd_sankey(cfg, (tmp.path / "triage" / "labels.csv").string(),
                               (tmp.path / "sankey2").string()) == pipeline::kExitOk);
  CHECK(slurp(tmp.path / "sankey2" / "sankey.csv") == sankey);
  CHECK(slurp(tmp.path / "sankey2" / "sankey.json") ==
        slurp(tmp.path / "triage" / "sankey.json"));
}

TEST_CASE("cmd_filter removes leaking ligands") {
  TempDir tmp("filter");
  const auto corpus = build_corpus(tmp.path / "corpus", 6);
  config::PipelineConfig cfg;

  // Test set unrelated to the corpus benzene ligands: everything is kept.
  spit(tmp.path / "unrelated.sdf", to_sdf(linear_chain({"C", "N", "O", "S", "C"}), "fep_x"));
  REQUIRE(pipeline::cmd_filter(cfg, corpus.manifest.string(),
                               (tmp.path / "unrelated.sdf").string(),
                               (tmp.path / "keep").string()) == pipeline::kExitOk);
  const auto kept = triage::parse_manifest_jsonl(slurp(tmp.path / "keep" / "kept.jsonl"));
  CHECK(kept.size() == corpus.entries.size());
  for (const auto& e : kept) CHECK(e.fingerprint.has_value());

  // Benzene in the test set: every corpus ligand leaks at similarity 1.
  spit(tmp.path / "benzene.sdf", to_sdf(benzene(), "fep_benzene"));
  REQUIRE(pipeline::cmd_filter(cfg, corpus.manifest.string(),
                               (tmp.path / "benzene.sdf").string(),
                               (tmp.path / "drop").string()) == pipeline::kExitOk);
  CHECK(triage::parse_manifest_jsonl(slurp(tmp.path / "drop" / "kept.jsonl")).empty());
  const std::string audit = slurp(tmp.path / "drop" / "audit.csv");
  CHECK(audit.find("1.000000,fep_benzene,true") != std::string::npos);
}

TEST_CASE("cmd_evaluate writes aggregate statistics") {
  TempDir tmp("evaluate");
  std::string csv = "series,ligand_id,pred_pk,exp_pk\n";
  SplitMix64 rng(9);
  for (int s = 0; s < 3; ++s)
    for (int i = 0; i < 12; ++i) {
      const double x = 4 + rng.uniform() * 4;
      char row[128];
      std::snprintf(row, sizeof row, "s%d,l%d,%.3f,%.3f\n", s, i, x, x + rng.normal() * 0.4);
      csv += row;
    }
  spit(tmp.path / "preds.csv", csv);

  config::PipelineConfig cfg;
  cfg.bootstrap_samples = 100;
  cfg.seed = 7;
  REQUIRE(pipeline::cmd_evaluate(cfg, (tmp.path / "preds.csv").string(),
                                 (tmp.path / "eval").string()) == pipeline::kExitOk);
  const std::string aggregate = slurp(tmp.path / "eval" / "aggregate.json");
  CHECK(aggregate.find("weighted_pcc") != std::string::npos);
  CHECK(aggregate.find("\"series_used\": 3") != std::string::npos);
  const std::string per_series = slurp(tmp.path / "eval" / "per_series.csv");
  CHECK(std::count(per_series.begin(), per_series.end(), '\n') == 4);

  // No eligible series: batch failure.
  spit(tmp.path / "small.csv", "series,ligand_id,pred_pk,exp_pk\na,l1,5,5\n");
  CHECK(pipeline::cmd_evaluate(cfg, (tmp.path / "small.csv").string(),
                               (tmp.path / "eval2").string()) == pipeline::kExitBatchFailure);
}

TEST_CASE("cmd_subsets partitions by hybrid score and nests subsets") {
  TempDir tmp("subsets");
  const auto corpus = build_corpus(tmp.path / "corpus");  // hybrid 0.8 .. 2.15
  config::PipelineConfig cfg;
  cfg.seed = 11;

  // Subsets read the hybrid score from the scored manifest.
  REQUIRE(pipeline::cmd_score(cfg, corpus.manifest.string(), (tmp.path / "scored").string()) ==
          pipeline::kExitOk);
  const std::string scored = (tmp.path / "scored" / "scored.jsonl").string();

  REQUIRE(pipeline::cmd_subsets(cfg, scored, {1, 2}, (tmp.path / "subs").string()) ==
          pipeline::kExitOk);
  const std::string summary = slurp(tmp.path / "subs" / "summary.json");
  CHECK(summary.find("\"high\"") != std::string::npos);
  CHECK(summary.find("\"moderate\"") != std::string::npos);
  CHECK(summary.find("\"low\"") != std::string::npos);

  // Inclusion: the size-1 subset is contained in the size-2 subset.
  for (const char* part : {"high", "moderate", "low"}) {
    const fs::path small = tmp.path / "subs" / part / "subset_00_size_1.jsonl";
    const fs::path large = tmp.path / "subs" / part / "subset_01_size_2.jsonl";
    if (!fs::exists(small) || !fs::exists(large)) continue;
    const auto small_entries = triage::parse_manifest_jsonl(slurp(small));
    const auto large_entries = triage::parse_manifest_jsonl(slurp(large));
    REQUIRE(small_entries.size() == 1);
    REQUIRE(large_entries.size() == 2);
    CHECK((large_entries[0].id == small_entries[0].id ||
           large_entries[1].id == small_entries[0].id));
  }

  // Determinism across runs.
  REQUIRE(pipeline::cmd_subsets(cfg, scored, {1, 2}, (tmp.path / "subs2").string()) ==
          pipeline::kExitOk);
  CHECK(slurp(tmp.path / "subs" / "summary.json") == slurp(tmp.path / "subs2" / "summary.json"));
  for (const char* part : {"high", "moderate", "low"}) {
    const fs::path a = tmp.path / "subs" / part / "subset_01_size_2.jsonl";
    if (!fs::exists(a)) continue;
    CHECK(slurp(a) == slurp(tmp.path / "subs2" / part / "subset_01_size_2.jsonl"));
  }
}

#ifdef PLCURATE_BIN
TEST_CASE("command line binary smoke test") {
  TempDir tmp("cli");
  const auto corpus = build_corpus(tmp.path / "corpus", 4);
  const std::string out = (tmp.path / "out").string();
  const std::string cmd = std::string(PLCURATE_BIN) + " score --manifest " +
                          corpus.manifest.string() + " --out-dir " + out + " 2>/dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(tmp.path / "out" / "scored.jsonl"));

  const std::string usage = std::string(PLCURATE_BIN) + " score 2>/dev/null";
  const int rc = std::system(usage.c_str());
  CHECK(WEXITSTATUS(rc) == 1);  // missing required --manifest
}
#endif
