// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

// Acceptance runner: one PASS/FAIL line per criterion.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "../oracle/pearson_cases.hpp"
#include "../oracle/t_integral.hpp"
#include "patternscope/analytics.hpp"
#include "patternscope/csv.hpp"
#include "patternscope/detector.hpp"
#include "patternscope/heatmap.hpp"
#include "patternscope/keyvalue.hpp"
#include "patternscope/pipeline.hpp"
#include "patternscope/stats.hpp"
#include "patternscope/synth.hpp"
#include "patternscope/verifier.hpp"

namespace fs = std::filesystem;
using namespace patternscope;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path cli;
  fs::path smoke;
  fs::path work;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

fs::path fresh(const Context& ctx, const std::string& name) {
  const fs::path p = ctx.work / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

int run_cli(const Context& ctx, const std::string& args, const fs::path& log) {
  const std::string cmd = quote(ctx.cli) + " " + args + " > " + quote(log) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 1 -------------------------------------------------------------------------------

Outcome fab_element_fidelity() {
  const fs::path path = fs::path(PATTERNSCOPE_TEST_DATA) / "fab_element.json";
  const Screen s = parse_view_hierarchy(slurp(path), "fab_element");
  const ViewNode& n = s.root;
  const bool fields = n.class_name == "android.support.design.widget.FloatingActionButton" &&
                      n.ancestors.size() == 5 &&
                      n.ancestors[0] == "android.support.design.widget.VisibilityAwareImageButton" &&
                      n.ancestors[4] == "java.lang.Object" && n.bounds == IntRect{1188, 2140, 1384, 2336} &&
                      !n.visible_to_user && n.resource_id == "se.perigee.android.seven:id/fab" &&
                      n.children.empty();
  const auto detections = detect_in_screen(s, default_rules(), "se.perigee.android.seven");
  std::size_t fab = 0;
  for (const auto& d : detections) fab += d.kind == ComponentKind::kFloatingActionButton;
  return {fields && fab == 0, fmt::format("fields {}, FAB detections {}", fields ? "match" : "differ", fab)};
}

// 2 -------------------------------------------------------------------------------

Outcome detector_precision_recall() {
  const auto t0 = Clock::now();
  SynthSpec spec;
  spec.app_count = 1000;
  spec.decoy_rate = 0.2;
  spec.occlusion_rate = 0.1;
  spec.render = false;
  spec.seed = 2;
  const SynthCorpus corpus = generate(spec);

  std::set<std::tuple<std::string, std::string, std::string, ComponentKind>> truth;
  for (const auto& n : corpus.nodes)
    if (n.role != NodeRole::kDecoy) truth.insert({n.package_id, n.screen_id, format_node_path(n.node_path), n.kind});
  std::size_t tp = 0, fp = 0;
  const auto rules = default_rules();
  for (const auto& app : corpus.apps)
    for (const auto& [kind, list] : detect_in_app(app, rules))
      for (const auto& d : list)
        (truth.count({app.package_id, d.screen_id, format_node_path(d.node_path), kind}) ? tp : fp)++;
  const double recall = truth.empty() ? 0 : static_cast<double>(tp) / truth.size();
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double secs = seconds_since(t0);
  return {recall == 1.0 && precision < 1.0 && secs < 30,
          fmt::format("recall {:.4f}, precision {:.4f} ({} true, {} decoy hits), {:.1f} s", recall, precision, tp, fp,
                      secs)};
}

// 3 -------------------------------------------------------------------------------

fs::path write_pipeline_config(const fs::path& root, const std::string& extra) {
  const fs::path conf = root / "pipeline.conf";
  spit(conf,
       "corpus = corpus/apps\nmetadata = corpus/metadata.csv\nexclusions = corpus/exclusions.txt\n"
       "truth_labels = corpus/node_truth.csv\nout = out\nseed = 11\n" +
           extra);
  return conf;
}

std::map<std::pair<std::string, ComponentKind>, bool> read_ground_truth(const fs::path& path) {
  const csv::Table t = csv::read(path);
  const int cp = t.require("package", path), ck = t.require("kind", path), cu = t.require("uses", path);
  std::map<std::pair<std::string, ComponentKind>, bool> out;
  for (const auto& row : t.rows) out[{row[cp], *kind_from_string(row[ck])}] = row[cu] == "1" || row[cu] == "true";
  return out;
}

Outcome verified_usage_accuracy(const Context& ctx) {
  const auto t0 = Clock::now();
  const fs::path root = fresh(ctx, "criterion3");
  SynthSpec spec;
  spec.app_count = 1000;
  spec.decoy_rate = 0.2;
  spec.occlusion_rate = 0.1;
  spec.seed = 3;
  const SynthCorpus corpus = generate(spec);
  write_corpus(corpus, spec, root / "corpus");
  const PipelineConfig cfg = PipelineConfig::load(write_pipeline_config(root, ""));
  for (Stage s : {Stage::kIngest, Stage::kDetect, Stage::kHeatmap, Stage::kCrop, Stage::kTrain, Stage::kVerify})
    run_stage(s, cfg, false);

  std::string kinds;
  bool accuracy_ok = true;
  const fs::path report = cfg.out / "train" / "train_report.csv";
  const csv::Table t = csv::read(report);
  const int ck = t.require("kind", report), cs = t.require("status", report), ca = t.require("test_accuracy", report);
  int trained = 0;
  for (const auto& row : t.rows) {
    if (row[cs] != "trained") {
      accuracy_ok = false;
      kinds += fmt::format(" {}=untrained", row[ck]);
      continue;
    }
    ++trained;
    const double acc = std::stod(row[ca]);
    accuracy_ok = accuracy_ok && acc >= 0.95;
    kinds += fmt::format(" {}={:.3f}", row[ck], acc);
  }
  accuracy_ok = accuracy_ok && trained == 6;

  const auto truth = read_ground_truth(root / "corpus" / "ground_truth.csv");
  const UsageMap usage = read_usage(cfg.out / "verify" / "usage.csv");
  std::set<std::string> occluded_apps;
  for (const auto& n : corpus.nodes)
    if (n.role == NodeRole::kOccluded) occluded_apps.insert(n.package_id);
  std::size_t tp = 0, fp = 0, fn = 0, occ_tp = 0, occ_pos = 0;
  for (const auto& [key, uses] : truth) {
    const auto it = usage.find(key.first);
    const bool got = it != usage.end() && it->second.uses(key.second);
    if (got && uses) ++tp;
    if (got && !uses) ++fp;
    if (!got && uses) ++fn;
    if (uses && occluded_apps.count(key.first)) {
      ++occ_pos;
      occ_tp += got;
    }
  }
  const double precision = static_cast<double>(tp) / static_cast<double>(std::max<std::size_t>(1, tp + fp));
  const double recall = static_cast<double>(tp) / static_cast<double>(std::max<std::size_t>(1, tp + fn));
  const double secs = seconds_since(t0);
  const bool pass = accuracy_ok && precision >= 0.98 && recall >= 0.95 && secs < 300;
  return {pass, fmt::format("test accuracy{}; app-level precision {:.4f}, recall {:.4f} (apps with occlusions {}/{}); "
                            "{:.0f} s",
                            kinds, precision, recall, occ_tp, occ_pos, secs)};
}

// 4 -------------------------------------------------------------------------------

Outcome pearson_reference() {
  double worst_rho = 0, worst_p = 0;
  for (const auto& c : oracle::pearson_cases()) {
    const auto r = pearson(c.xs, c.ys);
    worst_rho = std::max(worst_rho, std::abs(r.rho - c.rho));
    const double rel = c.p_value == 0 ? std::abs(r.p_value) : std::abs(r.p_value - c.p_value) / c.p_value;
    worst_p = std::max(worst_p, rel);
  }

  double worst_int = 0;
  int grid = 0;
  for (std::size_t n : {3, 4, 5, 6, 8, 10, 15, 20, 30, 50, 100, 200, 1000})
    for (double rho = 0.0; rho < 0.995; rho += 0.05) {
      const double want = oracle::pearson_p_by_integration(rho, n);
      if (want < 1e-300) continue;
      ++grid;
      worst_int = std::max(worst_int, std::abs(pearson_p_value(rho, n) - want) / want);
    }

  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0, 1);
  std::uniform_real_distribution<double> scale(0.01, 100), shift(-1000, 1000);
  std::uniform_int_distribution<int> len(3, 60);
  double worst_sym = 0, worst_aff = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    const double coupling = z(rng);
    for (int j = 0; j < n; ++j) {
      x[j] = z(rng);
      y[j] = coupling * x[j] + z(rng);
    }
    const double rho = pearson(x, y).rho;
    worst_sym = std::max(worst_sym, std::abs(pearson(y, x).rho - rho));
    const double a = scale(rng), b = shift(rng), c = scale(rng), d = shift(rng);
    std::vector<double> ax(x), cy(y);
    for (double& v : ax) v = a * v + b;
    for (double& v : cy) v = c * v + d;
    worst_aff = std::max(worst_aff, std::abs(pearson(ax, cy).rho - rho));
  }
  const bool pass = oracle::pearson_cases().size() >= 20 && worst_rho <= 1e-12 && worst_p <= 1e-9 &&
                    worst_int <= 1e-9 && worst_sym <= 1e-12 && worst_aff <= 1e-12;
  return {pass, fmt::format("{} hand vectors max |drho| {:.2e}, max p rel {:.2e}; {} integration points max rel {:.2e}; "
                            "10000 cases symmetry {:.2e}, affine {:.2e}",
                            oracle::pearson_cases().size(), worst_rho, worst_p, grid, worst_int, worst_sym, worst_aff)};
}

// 5 -------------------------------------------------------------------------------

Outcome adoption_curve(const Context& ctx) {
  const auto t0 = Clock::now();
  const fs::path root = fresh(ctx, "criterion5");
  SynthSpec spec;
  spec.app_count = 10000;
  spec.screens_min = 1;
  spec.screens_max = 2;
  spec.adoption[ComponentKind::kFloatingActionButton] = {0.05, 0.40};
  spec.seed = 5;
  synthesize_to(spec, root / "corpus");
  const PipelineConfig cfg = PipelineConfig::load(write_pipeline_config(root, "bucket_count = 100\n"));
  run_all(cfg, false);

  const fs::path curves = cfg.out / "analyze" / "bucket_curves.csv";
  const csv::Table t = csv::read(curves);
  const int cm = t.require("metric", curves), cp = t.require("predicate", curves), cf = t.require("fraction", curves);
  std::vector<double> fraction;
  for (const auto& row : t.rows)
    if (row[cm] == "avg_rating" && row[cp] == "FloatingActionButton") fraction.push_back(std::stod(row[cf]));
  if (fraction.size() != 100) return {false, fmt::format("expected 100 buckets, found {}", fraction.size())};

  std::vector<double> index(100), planted(100, 0.0);
  for (int b = 0; b < 100; ++b) index[b] = b + 1;
  const double rho = pearson(index, fraction).rho;
  // Planted adoption at each bucket's mean percentile, for reference.
  for (int b = 0; b < 100; ++b) planted[b] = spec.adoption[ComponentKind::kFloatingActionButton].at((b + 0.5) / 100);
  const double vs_planted = pearson(planted, fraction).rho;
  const double secs = seconds_since(t0);
  return {rho >= 0.9, fmt::format("bucket-index correlation {:.4f} (vs planted {:.4f}); first {:.2f}, last {:.2f}; {:.0f} s",
                                  rho, vs_planted, fraction.front(), fraction.back(), secs)};
}

// 6 -------------------------------------------------------------------------------

Outcome split_invariants() {
  SynthSpec spec;
  spec.app_count = 100;
  spec.seed = 6;
  const SynthCorpus corpus = generate(spec);
  const CropTruth truth = corpus.crop_truth();
  std::map<ComponentKind, Heatmap> none;
  std::vector<TrainingSample> samples;
  for (const auto& app : corpus.apps) {
    const auto batch = extract_crops(app, detect_in_app(app, default_rules()), none, corpus.loader(), {0.1, false});
    for (const auto& s : batch.samples)
      samples.push_back({s.source.package_id, crop_features(s.image, 4), training_label(s.label, s.source, &truth)});
  }
  std::set<std::string> apps;
  for (const auto& s : samples) apps.insert(s.package_id);
  // Pad with apps that only have negatives so the split covers exactly 100 apps.
  for (const auto& app : corpus.apps)
    if (!apps.count(app.package_id)) {
      samples.push_back({app.package_id, Eigen::VectorXd::Zero(48), 0});
      apps.insert(app.package_id);
    }

  bool ok = true;
  std::string worst;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const DatasetSplit a = split_dataset(samples, seed);
    const DatasetSplit b = split_dataset(samples, seed);
    ok = ok && a.train == b.train && a.validation == b.validation && a.test == b.test;
    const auto near = [](std::size_t n, int want) { return std::abs(static_cast<int>(n) - want) <= 2; };
    ok = ok && near(a.train_apps.size(), 80) && near(a.validation_apps.size(), 10) && near(a.test_apps.size(), 10);
    std::map<std::string, int> part;
    for (const auto& [idx, p] : {std::pair{&a.train, 0}, std::pair{&a.validation, 1}, std::pair{&a.test, 2}})
      for (std::size_t i : *idx) {
        const auto [it, fresh_entry] = part.emplace(samples[i].package_id, p);
        ok = ok && it->second == p;
      }
    ok = ok && a.train.size() + a.validation.size() + a.test.size() == samples.size();
    if (seed == 0)
      worst = fmt::format("{}/{}/{} apps", a.train_apps.size(), a.validation_apps.size(), a.test_apps.size());
  }
  return {ok, fmt::format("50 seeds over {} samples from {} apps; seed 0 gives {}", samples.size(), apps.size(), worst)};
}

// 7 -------------------------------------------------------------------------------

Outcome heatmap_properties() {
  bool ok = true;
  const Extent ext{1440, 2560};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> x(0, 1439), y(0, 2559), sz(1, 400);
  for (int round = 0; round < 500 && ok; ++round) {
    std::vector<IntRect> rects;
    for (int i = 0; i < 30; ++i) {
      const int l = x(rng), t = y(rng);
      rects.push_back({l, t, std::min(1440, l + sz(rng)), std::min(2560, t + sz(rng))});
    }
    Heatmap a(ComponentKind::kSnackBar), b(ComponentKind::kSnackBar), lo(ComponentKind::kSnackBar),
        hi(ComponentKind::kSnackBar);
    for (const auto& r : rects) a.accumulate(r, ext);
    auto shuffled = rects;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (const auto& r : shuffled) b.accumulate(r, ext);
    for (std::size_t i = 0; i < rects.size(); ++i) (i % 3 ? lo : hi).accumulate(rects[i], ext);
    lo.merge(hi);
    const Grid<double> n = normalized(a);
    ok = a == b && lo == a && a.total() == 30 && a.counts().sum() == 30 && n.maxCoeff() == 1.0 && n.minCoeff() >= 0;
    const Cell c = argmax_cell(a);
    ok = ok && a.counts()(c.row, c.col) == a.counts().maxCoeff();
  }
  ok = ok && cell_of({20, 0, 30, 10}, {100, 100}, 4, 4) == Cell{0, 1};

  SynthSpec spec;
  spec.app_count = 300;
  spec.render = false;
  spec.seed = 7;
  const SynthCorpus corpus = generate(spec);
  Heatmap fab(ComponentKind::kFloatingActionButton);
  for (const auto& app : corpus.apps)
    for (const auto& s : app.screens)
      for (const auto& d : detect_in_screen(s, default_rules(), app.package_id))
        if (d.kind == ComponentKind::kFloatingActionButton) fab.accumulate(d, s);
  const Cell mode = argmax_cell(fab);
  const bool bottom_right = mode.col >= fab.cols() / 2 && mode.row >= fab.rows() / 2;
  return {ok && bottom_right,
          fmt::format("500 random maps: order/merge/normalization {}; FAB mode cell ({}, {}) of {}x{}",
                      ok ? "hold" : "violated", mode.row, mode.col, fab.rows(), fab.cols())};
}

// 8 -------------------------------------------------------------------------------

std::map<std::string, std::string> data_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext == ".csv" || ext == ".json") out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

Outcome deterministic_runs(const Context& ctx) {
  const fs::path root = fresh(ctx, "criterion8");
  const fs::path conf = ctx.smoke / "pipeline.conf";
  const int a = run_cli(ctx, "all --config " + quote(conf) + " --out " + quote(root / "run1"), root / "run1.log");
  const int b = run_cli(ctx, "all --config " + quote(conf) + " --out " + quote(root / "run2"), root / "run2.log");
  if (a != 0 || b != 0) return {false, fmt::format("runs exited {} and {}", a, b)};
  const auto f1 = data_files(root / "run1"), f2 = data_files(root / "run2");
  std::size_t differing = 0;
  for (const auto& [name, text] : f1) {
    const auto it = f2.find(name);
    differing += it == f2.end() || it->second != text;
  }
  differing += f2.size() > f1.size() ? f2.size() - f1.size() : 0;
  return {differing == 0 && !f1.empty(), fmt::format("{} CSV/JSON files compared, {} differ", f1.size(), differing)};
}

// 9 -------------------------------------------------------------------------------

Outcome external_equivalence(const Context& ctx) {
  const fs::path root = fresh(ctx, "criterion9");
  const fs::path conf = ctx.smoke / "pipeline.conf";
  const int a = run_cli(ctx, "all --config " + quote(conf) + " --out " + quote(root / "reference"), root / "reference.log");
  if (a != 0) return {false, fmt::format("reference run exited {}", a)};

  // Same config with absolute paths and the external classifier.
  const KeyValues kv = KeyValues::load(conf);
  std::string text;
  for (const auto& [key, value] : kv.values()) {
    if (key == "classifier" || key == "out" || key == "external_command") continue;
    const bool is_path = key == "corpus" || key == "metadata" || key == "exclusions" || key == "keywords" ||
                         key == "truth_labels";
    text += key + " = " + (is_path ? (ctx.smoke / value).lexically_normal().string() : value) + "\n";
  }
  text += "classifier = external\n";
  text += "external_command = " + quote(ctx.cli) + " score-external --models " + quote(root / "reference" / "train") + "\n";
  text += "out = " + (root / "external").string() + "\n";
  spit(root / "external.conf", text);
  const int b = run_cli(ctx, "all --config " + quote(root / "external.conf"), root / "external.log");
  if (b != 0) return {false, fmt::format("external run exited {} (see {})", b, (root / "external.log").string())};

  const UsageMap ref = read_usage(root / "reference" / "verify" / "usage.csv");
  const UsageMap ext = read_usage(root / "external" / "verify" / "usage.csv");
  const bool same_files = slurp(root / "reference" / "verify" / "usage.csv") == slurp(root / "external" / "verify" / "usage.csv");
  std::size_t users = 0;
  for (const auto& [pkg, u] : ref)
    for (const auto& [k, ku] : u.kinds) users += ku.uses;
  return {ref == ext && same_files && !ref.empty(),
          fmt::format("{} apps, {} (app, kind) uses; usage maps {}", ref.size(), users, ref == ext ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PatternScope acceptance criteria"};
  Context ctx;
  int only = 0;
  std::string cli, smoke, work = "acceptance-work";
  app.add_option("--cli", cli, "Path to the patternscope binary")->required();
  app.add_option("--smoke", smoke, "Directory holding the smoke pipeline.conf and generated corpus")->required();
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  ctx.cli = fs::absolute(cli);
  ctx.smoke = fs::absolute(smoke);
  ctx.work = fs::absolute(work);
  fs::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"captured FAB element parses exactly and yields no FAB", fab_element_fidelity},
      {"detector recall 1 with precision below 1 on 1000 apps", detector_precision_recall},
      {"verified usage matches ground truth", [&] { return verified_usage_accuracy(ctx); }},
      {"pearson and p-values match oracles", pearson_reference},
      {"planted adoption curve recovered over 10000 apps", [&] { return adoption_curve(ctx); }},
      {"dataset split invariants", split_invariants},
      {"heatmap properties", heatmap_properties},
      {"two smoke runs give identical tables", [&] { return deterministic_runs(ctx); }},
      {"external scorer matches in-process scoring", [&] { return external_equivalence(ctx); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("criterion {} {}: {} ({})\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
