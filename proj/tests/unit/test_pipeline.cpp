// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include <doctest.h>

#include "patternscope/error.hpp"
#include "patternscope/pipeline.hpp"
#include "patternscope/synth.hpp"
#include "support.hpp"

using namespace patternscope;
namespace fs = std::filesystem;

namespace {

fs::path make_project(const std::string& name) {
  const fs::path root = test::scratch(name);
  SynthSpec spec;
  spec.app_count = 12;
  spec.screenshot_extension = ".png";
  write_corpus(generate(spec), spec, root / "corpus");
  test::spit(root / "pipeline.conf",
             "corpus = corpus/apps\nmetadata = corpus/metadata.csv\nexclusions = corpus/exclusions.txt\n"
             "bucket_count = 4\ncategory_min_count = 2\nout = out\nseed = 3\n");
  return root;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("detect before ingest names the stage to run first") {
  const fs::path root = make_project("pipe-dep");
  const PipelineConfig cfg = PipelineConfig::load(root / "pipeline.conf");
  try {
    run_stage(Stage::kDetect, cfg, false);
    FAIL("expected DependencyError");
  } catch (const DependencyError& e) {
    CHECK(std::string(e.what()).find("patternscope ingest") != std::string::npos);
    CHECK(e.exit_code() == 5);
  }
  CHECK_FALSE(fs::exists(cfg.out / "detect"));
}

TEST_CASE("re-run with unchanged inputs skips and leaves the manifest identical") {
  const fs::path root = make_project("pipe-idem");
  const PipelineConfig cfg = PipelineConfig::load(root / "pipeline.conf");
  const auto first_ingest = run_stage(Stage::kIngest, cfg, false);
  const auto first_detect = run_stage(Stage::kDetect, cfg, false);
  CHECK_FALSE(first_ingest.skipped);
  const std::string manifest = test::slurp(cfg.out / "manifest.json");

  const auto again = run_stage(Stage::kIngest, cfg, false);
  CHECK(again.skipped);
  CHECK(again.output_hash == first_ingest.output_hash);
  CHECK(run_stage(Stage::kDetect, cfg, false).skipped);
  CHECK(test::slurp(cfg.out / "manifest.json") == manifest);

  const auto forced = run_stage(Stage::kDetect, cfg, true);
  CHECK_FALSE(forced.skipped);
  CHECK(forced.output_hash == first_detect.output_hash);

  // A changed stage parameter invalidates the stage.
  PipelineConfig other = cfg;
  other.heatmap_cols = 10;
  run_stage(Stage::kHeatmap, cfg, false);
  CHECK_FALSE(run_stage(Stage::kHeatmap, other, false).skipped);

  // Tampering with an output directory forces a re-run.
  test::spit(cfg.out / "detect" / "extra.txt", "x");
  CHECK_FALSE(run_stage(Stage::kDetect, cfg, false).skipped);
  CHECK_FALSE(fs::exists(cfg.out / "detect" / "extra.txt"));
}

TEST_CASE("detections round trip through the stage files") {
  const fs::path root = make_project("pipe-detect");
  const PipelineConfig cfg = PipelineConfig::load(root / "pipeline.conf");
  run_stage(Stage::kIngest, cfg, false);
  run_stage(Stage::kDetect, cfg, false);
  const auto apps = read_ingested(cfg.out / "ingest", cfg.corpus_root, true);
  CHECK(apps.size() == 12);
  const auto stored = read_detections(cfg.out / "detect" / "detections.csv");
  std::size_t direct = 0;
  for (const auto& app : apps)
    for (const auto& [k, list] : detect_in_app(app, default_rules())) direct += list.size();
  std::size_t total = 0;
  for (const auto& [pkg, by_kind] : stored)
    for (const auto& [k, list] : by_kind) total += list.size();
  CHECK(total == direct);
}

TEST_CASE("config errors") {
  const fs::path root = make_project("pipe-cfg");
  test::spit(root / "bad1.conf", "corpus = corpus/apps\nmetadata = corpus/metadata.csv\nbogus = 1\n");
  test::spit(root / "bad2.conf", "metadata = corpus/metadata.csv\n");
  test::spit(root / "bad3.conf", "corpus = nowhere\nmetadata = corpus/metadata.csv\n");
  test::spit(root / "bad4.conf", "corpus = corpus/apps\nmetadata = corpus/metadata.csv\nclassifier = magic\n");
  for (const char* f : {"bad1.conf", "bad2.conf", "bad3.conf", "bad4.conf"}) {
    CAPTURE(f);
    CHECK_THROWS_AS(PipelineConfig::load(root / f), ConfigError);
  }
  CHECK(stage_from_string("heatmap") == Stage::kHeatmap);
  CHECK_FALSE(stage_from_string("nope").has_value());
}

}  // TEST_SUITE
