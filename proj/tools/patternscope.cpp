// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "patternscope/error.hpp"
#include "patternscope/keyvalue.hpp"
#include "patternscope/pipeline.hpp"
#include "patternscope/synth.hpp"
#include "patternscope/verifier.hpp"

namespace fs = std::filesystem;
using namespace patternscope;

namespace {

void print(const StageResult& r) {
  fmt::print("{}: {} [{}]\n", to_string(r.stage), r.skipped ? "skipped (unchanged)" : "done", r.output_hash);
  for (const auto& n : r.notes) fmt::print("  {}\n", n);
}

int run(int argc, char** argv) {
  CLI::App app{"Detects, verifies and analyzes UI component usage across Android screen corpora."};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::uint64_t seed = 0;
  bool force = false;

  std::vector<std::string> names;
  for (Stage s : kAllStages) names.emplace_back(to_string(s));
  names.emplace_back("all");
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, name == "all" ? "Run every stage in order" : "Run the " + name + " stage");
    sub->add_option("--config", config_path, "Pipeline config file (key = value)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out_override, "Override the output directory");
    sub->add_flag("--stage-force", force, "Re-run even when inputs are unchanged");
  }

  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  synth->add_option("--config", synth_config, "Generator settings file (key = value)")->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", seed, "Override the generator seed");

  std::string models_dir, batch_dir;
  auto* scorer = app.add_subcommand("score-external", "Reference scorer for the external scoring protocol");
  scorer->add_option("--models", models_dir, "Directory of <Kind>.model files")->required()->check(CLI::ExistingDirectory);
  scorer->add_option("batch", batch_dir, "Batch directory with manifest.csv")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorClass::kConfig);
  }

  if (synth->parsed()) {
    SynthSpec spec;
    if (!synth_config.empty()) spec = synth_spec_from(KeyValues::load(synth_config));
    if (synth->count("--seed")) spec.seed = seed;
    const SynthCorpus corpus = synthesize_to(spec, synth_out);
    fmt::print("synth: {} apps written to {}\n", corpus.apps.size(), synth_out);
    return 0;
  }
  if (scorer->parsed()) {
    score_batch_directory(batch_dir, load_models(models_dir));
    return 0;
  }

  for (auto* sub : app.get_subcommands()) {
    PipelineConfig config = PipelineConfig::load(config_path);
    if (sub->count("--seed")) config.seed = seed;
    if (!out_override.empty()) config.out = fs::absolute(out_override);
    if (sub->get_name() == "all") {
      for (const auto& r : run_all(config, force)) print(r);
    } else {
      print(run_stage(*stage_from_string(sub->get_name()), config, force));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "patternscope: error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "patternscope: error: %s\n", e.what());
    return 1;
  }
}
