// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/pipeline.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "patternscope/crop.hpp"
#include "patternscope/csv.hpp"
#include "patternscope/error.hpp"
#include "patternscope/heatmap.hpp"
#include "patternscope/report.hpp"

namespace patternscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

class Hasher {
 public:
  void add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
    // Field separator so ("ab","c") and ("a","bc") differ.
    h_ ^= 0xff;
    h_ *= 0x100000001b3ULL;
  }
  std::string hex() const { return fmt::format("{:016x}", h_); }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "corpus",         "metadata",           "exclusions",     "keywords",         "hierarchy_extension",
      "screenshot_extensions", "heatmap_cols", "heatmap_rows",  "margin_fraction",  "mine_negatives",
      "classifier",     "external_command",   "external_threshold", "truth_labels", "input_size",
      "decision_threshold", "tune_threshold", "learning_rate",  "l2",               "max_epochs",
      "patience",       "chance_margin",      "install_threshold", "category_min_count", "bucket_count",
      "out",            "seed"};
  return keys;
}

fs::path stage_dir(const PipelineConfig& c, Stage s) { return c.out / std::string(to_string(s)); }
fs::path manifest_path(const PipelineConfig& c) { return c.out / "manifest.json"; }

json read_manifest(const PipelineConfig& c) {
  const fs::path p = manifest_path(c);
  if (!fs::exists(p)) return json::object();
  try {
    json j = json::parse(read_file(p));
    return j.is_object() ? j : json::object();
  } catch (const json::parse_error&) {
    return json::object();
  }
}

void write_manifest(const PipelineConfig& c, const json& j) {
  const fs::path p = manifest_path(c);
  const fs::path tmp = p.string() + ".tmp";
  write_text(tmp, j.dump(2) + "\n");
  fs::rename(tmp, p);
}

std::string file_hash(const std::optional<fs::path>& p) {
  if (!p) return "none";
  Hasher h;
  h.add(read_file(*p));
  return h.hex();
}

std::string stage_params(Stage s, const PipelineConfig& c) {
  std::ostringstream o;
  switch (s) {
    case Stage::kIngest: {
      o << c.hierarchy_extension;
      for (const auto& e : c.screenshot_extensions) o << " " << e;
      o << "|corpus=" << hash_tree(c.corpus_root) << "|metadata=" << file_hash(c.metadata)
        << "|exclusions=" << file_hash(c.exclusions);
      break;
    }
    case Stage::kDetect: o << format_rules(c.rules()); break;
    case Stage::kHeatmap: o << c.heatmap_cols << "x" << c.heatmap_rows; break;
    case Stage::kCrop: o << num(c.margin_fraction) << " " << c.mine_negatives; break;
    case Stage::kTrain: {
      const TrainConfig& t = c.train;
      o << t.input_size << " " << num(t.decision_threshold) << " " << t.tune_threshold << " " << num(t.learning_rate)
        << " " << num(t.l2) << " " << t.max_epochs << " " << t.patience << " " << num(t.chance_margin) << " seed=" << c.seed
        << " truth=" << file_hash(c.truth_labels);
      break;
    }
    case Stage::kVerify:
      o << (c.classifier == ClassifierMode::kReference ? "reference" : "external:" + c.external_command + " " +
                                                                            num(c.external_threshold));
      break;
    case Stage::kAnalyze:
      o << num(c.analysis.install_threshold) << " " << c.analysis.category_min_count << " " << c.analysis.bucket_count;
      break;
    case Stage::kReport: o << "report"; break;
  }
  return o.str();
}

ExclusionReason parse_exclusion(const std::string& s) {
  if (s == "none") return ExclusionReason::kNone;
  if (s == "exclusion_list") return ExclusionReason::kExclusionList;
  if (s == "no_screens") return ExclusionReason::kNoScreens;
  throw DataError("unknown exclusion reason '" + s + "'");
}

std::map<ComponentKind, Heatmap> read_heatmaps(const fs::path& dir) {
  std::map<ComponentKind, Heatmap> maps;
  for (ComponentKind k : kAllKinds) {
    const std::string name(to_string(k));
    Heatmap m = parse_grid(read_file(dir / (name + ".grid")));
    parse_sizes(m, read_file(dir / (name + ".sizes")));
    maps.emplace(k, std::move(m));
  }
  return maps;
}

// Stage bodies ---------------------------------------------------------------------

std::vector<std::string> do_ingest(const PipelineConfig& c, const fs::path& out) {
  const MetadataTable metadata = load_metadata(c.metadata);
  const std::set<std::string> exclusions = c.exclusions ? load_exclusions(*c.exclusions) : std::set<std::string>{};
  CorpusLayout layout{c.corpus_root, c.hierarchy_extension, c.screenshot_extensions};
  const Corpus corpus = assemble_corpus(layout, metadata, exclusions);

  std::string apps = "package,exclusion,avg_rating,installs,category\n";
  std::string screens = "package,screen,hierarchy,screenshot,width,height,virtual_width,virtual_height\n";
  for (const AppRecord& a : corpus.apps) {
    apps += csv::join({a.package_id, std::string(to_string(a.exclusion)), a.metadata ? num(a.metadata->avg_rating) : "",
                       a.metadata ? std::to_string(a.metadata->installs) : "", a.metadata ? a.metadata->category : ""}) +
            "\n";
    for (const Screen& s : a.screens) {
      const fs::path shot = s.screenshot.path.lexically_relative(c.corpus_root);
      const fs::path doc = fs::path(a.package_id) / (s.screen_id + c.hierarchy_extension);
      screens += csv::join({a.package_id, s.screen_id, doc.generic_string(), shot.generic_string(),
                            std::to_string(s.screenshot.pixels.width), std::to_string(s.screenshot.pixels.height),
                            std::to_string(s.virtual_extent.width), std::to_string(s.virtual_extent.height)}) +
                 "\n";
    }
  }
  write_text(out / "apps.csv", apps);
  write_text(out / "screens.csv", screens);

  std::string rejected = "line,package,reason\n";
  for (const auto& r : metadata.rejected)
    rejected += csv::join({std::to_string(r.line), r.package_id, r.reason}) + "\n";
  write_text(out / "rejected_metadata.csv", rejected);
  std::string warnings;
  for (const auto& w : corpus.warnings) warnings += w + "\n";
  write_text(out / "warnings.txt", warnings);

  const CorpusSummary& s = corpus.summary;
  json j = {{"total", s.total},     {"excluded", s.excluded}, {"metadata_missing", s.metadata_missing},
            {"analyzable", s.analyzable}, {"screens", s.screens}, {"dropped_screens", s.dropped_screens},
            {"rejected_metadata_rows", metadata.rejected.size()}};
  write_text(out / "summary.json", j.dump(2) + "\n");
  return {fmt::format("{} apps ({} excluded, {} without metadata, {} analyzable), {} screens, {} dropped", s.total,
                      s.excluded, s.metadata_missing, s.analyzable, s.screens, s.dropped_screens)};
}

std::vector<std::string> do_detect(const PipelineConfig& c, const fs::path& out) {
  const auto apps = read_ingested(stage_dir(c, Stage::kIngest), c.corpus_root, true);
  const auto rules = c.rules();
  std::map<std::string, AppDetections> all;
  std::map<ComponentKind, std::pair<int, int>> counts;  // detections, apps
  for (const AppRecord& a : apps) {
    AppDetections d = detect_in_app(a, rules);
    for (const auto& [k, list] : d) {
      if (list.empty()) continue;
      counts[k].first += static_cast<int>(list.size());
      ++counts[k].second;
    }
    all.emplace(a.package_id, std::move(d));
  }
  write_detections(out / "detections.csv", all);
  std::string summary = "kind,detections,apps\n";
  std::vector<std::string> notes;
  for (ComponentKind k : kAllKinds) {
    summary += fmt::format("{},{},{}\n", to_string(k), counts[k].first, counts[k].second);
    notes.push_back(fmt::format("{}: {} detections in {} apps", to_string(k), counts[k].first, counts[k].second));
  }
  write_text(out / "detect_summary.csv", summary);
  return notes;
}

std::vector<std::string> do_heatmap(const PipelineConfig& c, const fs::path& out) {
  const auto apps = read_ingested(stage_dir(c, Stage::kIngest), c.corpus_root, false);
  const auto detections = read_detections(stage_dir(c, Stage::kDetect) / "detections.csv");
  std::map<std::pair<std::string, std::string>, Extent> extents;
  for (const auto& a : apps)
    for (const auto& s : a.screens) extents[{a.package_id, s.screen_id}] = s.virtual_extent;

  std::map<ComponentKind, Heatmap> maps;
  for (ComponentKind k : kAllKinds) maps.emplace(k, Heatmap(k, c.heatmap_cols, c.heatmap_rows));
  for (const auto& [pkg, d] : detections)
    for (const auto& [k, list] : d)
      for (const Detection& det : list) {
        const auto it = extents.find({det.package_id, det.screen_id});
        if (it == extents.end()) throw DataError("detection on unknown screen " + det.package_id + "/" + det.screen_id);
        maps.at(k).accumulate(det.bounds, it->second);
      }

  std::string summary = "kind,total,argmax_row,argmax_col,median_width,median_height\n";
  std::vector<std::string> notes;
  for (const auto& [k, m] : maps) {
    const std::string name(to_string(k));
    write_text(out / (name + ".grid"), serialize_grid(m));
    write_text(out / (name + ".sizes"), serialize_sizes(m));
    if (m.total() > 0) {
      write_gray_png(out / (name + ".png"), render_heatmap(m));
      const Cell cell = argmax_cell(m);
      summary += fmt::format("{},{},{},{},{},{}\n", name, m.total(), cell.row, cell.col, num(m.median_width()),
                             num(m.median_height()));
      notes.push_back(fmt::format("{}: peak at row {} col {}", name, cell.row, cell.col));
    } else {
      summary += fmt::format("{},0,,,,\n", name);
    }
  }
  write_text(out / "heatmap_summary.csv", summary);
  return notes;
}

std::vector<std::string> do_crop(const PipelineConfig& c, const fs::path& out) {
  const auto apps = read_ingested(stage_dir(c, Stage::kIngest), c.corpus_root, false);
  const auto detections = read_detections(stage_dir(c, Stage::kDetect) / "detections.csv");
  const auto heatmaps = read_heatmaps(stage_dir(c, Stage::kHeatmap));
  const CropOptions options{c.margin_fraction, c.mine_negatives};
  std::vector<CropIndexRow> index;
  std::string warnings;
  const AppDetections none;
  for (const AppRecord& a : apps) {
    if (a.screens.empty()) continue;
    const auto it = detections.find(a.package_id);
    CropBatch batch = extract_crops(a, it == detections.end() ? none : it->second, heatmaps, load_screenshot, options);
    for (auto& row : write_crops(out, batch.samples)) index.push_back(std::move(row));
    for (const auto& w : batch.warnings) warnings += w + "\n";
  }
  write_crop_index(out / "crops.csv", index);
  write_text(out / "warnings.txt", warnings);
  const auto candidates = std::count_if(index.begin(), index.end(), [](const CropIndexRow& r) { return r.label == CropLabel::kCandidate; });
  return {fmt::format("{} crops ({} candidates, {} negatives)", index.size(), candidates,
                      index.size() - static_cast<std::size_t>(candidates))};
}

std::string metrics_csv(const ClassifierMetrics& m) {
  return fmt::format("{},{},{},{},{},{}", m.n, m.positives, num(m.accuracy), num(m.balanced_accuracy), num(m.precision),
                     num(m.recall));
}

std::vector<std::string> do_train(const PipelineConfig& c, const fs::path& out) {
  const fs::path crop_dir = stage_dir(c, Stage::kCrop);
  const auto rows = read_crop_index(crop_dir / "crops.csv");
  std::optional<CropTruth> truth;
  if (c.truth_labels) truth = load_crop_truth(*c.truth_labels);
  TrainConfig tc = c.train;
  tc.seed = c.seed;

  std::string report =
      "kind,status,train_samples,validation_samples,test_samples,epochs,threshold,"
      "train_n,train_pos,train_accuracy,train_balanced_accuracy,train_precision,train_recall,"
      "validation_n,validation_pos,validation_accuracy,validation_balanced_accuracy,validation_precision,validation_recall,"
      "test_n,test_pos,test_accuracy,test_balanced_accuracy,test_precision,test_recall\n";
  std::string splits = "kind,package,partition\n";
  std::vector<std::string> notes;
  for (ComponentKind k : kAllKinds) {
    std::vector<TrainingSample> samples;
    for (const auto& r : rows) {
      if (r.kind != k) continue;
      const Image8 img = read_image(crop_dir / r.file);
      samples.push_back({r.package_id, crop_features(img, tc.input_size),
                         training_label(r.label, CropSource{r.package_id, r.screen_id, r.node_path},
                                        truth ? &*truth : nullptr)});
    }
    const auto positives = std::count_if(samples.begin(), samples.end(), [](const TrainingSample& s) { return s.label == 1; });
    if (positives == 0) {
      report += fmt::format("{},skipped_no_positives,{},,,,,,,,,,,,,,,,,,,,,,\n", to_string(k), samples.size());
      notes.push_back(fmt::format("{}: no positive crops, no model", to_string(k)));
      continue;
    }
    const DatasetSplit split = split_dataset(samples, c.seed);
    for (const auto& [apps, name] : {std::pair{&split.train_apps, "train"}, std::pair{&split.validation_apps, "validation"},
                                     std::pair{&split.test_apps, "test"}})
      for (const auto& pkg : *apps) splits += fmt::format("{},{},{}\n", to_string(k), pkg, name);
    auto [model, r] = train(samples, split, k, tc);
    save_model(out / (std::string(to_string(k)) + ".model"), model);
    report += fmt::format("{},trained,{},{},{},{},{},{},{},{}\n", to_string(k), r.train_samples, r.validation_samples,
                          r.test_samples, r.epochs, num(r.threshold), metrics_csv(r.train), metrics_csv(r.validation),
                          metrics_csv(r.test));
    notes.push_back(fmt::format("{}: test accuracy {:.3f} on {} crops", to_string(k), r.test.accuracy, r.test.n));
  }
  write_text(out / "train_report.csv", report);
  write_text(out / "splits.csv", splits);
  return notes;
}

std::vector<std::string> do_verify(const PipelineConfig& c, const fs::path& out) {
  const auto apps = read_ingested(stage_dir(c, Stage::kIngest), c.corpus_root, false);
  const fs::path crop_dir = stage_dir(c, Stage::kCrop);
  std::vector<CropIndexRow> candidates;
  for (auto& r : read_crop_index(crop_dir / "crops.csv"))
    if (r.label == CropLabel::kCandidate) candidates.push_back(std::move(r));

  std::vector<double> scores, thresholds;
  if (c.classifier == ClassifierMode::kReference) {
    const ModelSet models = load_models(stage_dir(c, Stage::kTrain));
    for (const auto& r : candidates) {
      const auto it = models.find(r.kind);
      if (it == models.end())
        throw DataError(fmt::format("no verifier model for {} but {} has candidates", to_string(r.kind), r.package_id));
      scores.push_back(it->second.score(read_image(crop_dir / r.file)));
      thresholds.push_back(it->second.threshold);
    }
  } else {
    std::vector<Image8> images;
    images.reserve(candidates.size());
    for (const auto& r : candidates) images.push_back(read_image(crop_dir / r.file));
    std::vector<CropRef> batch;
    for (std::size_t i = 0; i < candidates.size(); ++i) batch.push_back({candidates[i].kind, &images[i]});
    ExternalScorer scorer{c.external_command, {}};
    for (ComponentKind k : kAllKinds) scorer.thresholds[k] = c.external_threshold;
    const fs::path exchange = c.out / ".verify-exchange";
    fs::remove_all(exchange);
    if (!batch.empty()) scores = external_verify(batch, scorer, exchange);
    fs::remove_all(exchange);
    for (const auto& r : candidates) thresholds.push_back(scorer.threshold(r.kind));
  }

  std::map<std::string, std::vector<ScoredCrop>> by_app;
  std::string score_csv = "file,kind,package,screen,node_path,score,threshold,positive\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& r = candidates[i];
    by_app[r.package_id].push_back({r.kind, scores[i], thresholds[i]});
    score_csv += csv::join({r.file.generic_string(), std::string(to_string(r.kind)), r.package_id, r.screen_id,
                            r.node_path ? format_node_path(*r.node_path) : "", num(scores[i]), num(thresholds[i]),
                            scores[i] >= thresholds[i] ? "1" : "0"}) +
                 "\n";
  }
  UsageMap usage;
  for (const AppRecord& a : apps) usage.emplace(a.package_id, aggregate_usage(a.package_id, by_app[a.package_id]));
  write_usage(out / "usage.csv", usage);
  write_text(out / "scores.csv", score_csv);
  const auto verified = std::count_if(candidates.begin(), candidates.end(), [&, i = std::size_t{0}](const CropIndexRow&) mutable {
    const bool ok = scores[i] >= thresholds[i];
    ++i;
    return ok;
  });
  return {fmt::format("{} of {} candidate crops verified", verified, candidates.size())};
}

std::vector<std::string> do_analyze(const PipelineConfig& c, const fs::path& out) {
  const auto apps = read_ingested(stage_dir(c, Stage::kIngest), c.corpus_root, false);
  const UsageMap usage = read_usage(stage_dir(c, Stage::kVerify) / "usage.csv");
  const AnalysisResults r = analyze(apps, usage, c.analysis);
  write_analysis(out, r);
  std::vector<std::string> notes{fmt::format("{} analyzable apps", r.analyzable)};
  notes.insert(notes.end(), r.notes.begin(), r.notes.end());
  return notes;
}

std::vector<std::string> do_report(const PipelineConfig& c, const fs::path& out) {
  ReportInputs in{stage_dir(c, Stage::kAnalyze), stage_dir(c, Stage::kHeatmap), stage_dir(c, Stage::kCrop),
                  stage_dir(c, Stage::kVerify), read_ingested(stage_dir(c, Stage::kIngest), c.corpus_root, false)};
  const auto files = render_reports(in, out);
  return {fmt::format("{} report files", files.size())};
}

}  // namespace

// Config -----------------------------------------------------------------------------

PipelineConfig PipelineConfig::from(const KeyValues& kv, const fs::path& base_dir) {
  for (const auto& [key, value] : kv.values())
    if (!known_keys().count(key)) throw ConfigError(kv.source() + ": unknown key '" + key + "'");
  auto resolve = [&](const std::string& v) {
    fs::path p(v);
    return (p.is_absolute() ? p : base_dir / p).lexically_normal();
  };
  auto required = [&](const std::string& key) {
    const auto v = kv.get(key);
    if (!v || v->empty()) throw ConfigError(kv.source() + ": missing required key '" + key + "'");
    return resolve(*v);
  };
  auto optional_path = [&](const std::string& key) -> std::optional<fs::path> {
    const auto v = kv.get(key);
    if (!v || v->empty()) return std::nullopt;
    return resolve(*v);
  };

  PipelineConfig c;
  c.corpus_root = required("corpus");
  c.metadata = required("metadata");
  c.exclusions = optional_path("exclusions");
  c.keywords = optional_path("keywords");
  c.truth_labels = optional_path("truth_labels");
  c.hierarchy_extension = kv.get_or("hierarchy_extension", c.hierarchy_extension);
  if (const auto v = kv.get("screenshot_extensions")) {
    std::istringstream in(*v);
    c.screenshot_extensions.clear();
    for (std::string e; in >> e;) c.screenshot_extensions.push_back(e);
  }
  c.heatmap_cols = static_cast<int>(kv.get_int("heatmap_cols", c.heatmap_cols));
  c.heatmap_rows = static_cast<int>(kv.get_int("heatmap_rows", c.heatmap_rows));
  c.margin_fraction = kv.get_double("margin_fraction", c.margin_fraction);
  c.mine_negatives = kv.get_bool("mine_negatives", c.mine_negatives);
  const std::string mode = kv.get_or("classifier", "reference");
  if (mode == "reference") c.classifier = ClassifierMode::kReference;
  else if (mode == "external") c.classifier = ClassifierMode::kExternal;
  else throw ConfigError(kv.source() + ": classifier must be 'reference' or 'external', got '" + mode + "'");
  c.external_command = kv.get_or("external_command", "");
  c.external_threshold = kv.get_double("external_threshold", c.external_threshold);
  c.train.input_size = static_cast<int>(kv.get_int("input_size", c.train.input_size));
  c.train.decision_threshold = kv.get_double("decision_threshold", c.train.decision_threshold);
  c.train.tune_threshold = kv.get_bool("tune_threshold", c.train.tune_threshold);
  c.train.learning_rate = kv.get_double("learning_rate", c.train.learning_rate);
  c.train.l2 = kv.get_double("l2", c.train.l2);
  c.train.max_epochs = static_cast<int>(kv.get_int("max_epochs", c.train.max_epochs));
  c.train.patience = static_cast<int>(kv.get_int("patience", c.train.patience));
  c.train.chance_margin = kv.get_double("chance_margin", c.train.chance_margin);
  c.analysis.install_threshold = kv.get_double("install_threshold", c.analysis.install_threshold);
  c.analysis.category_min_count = static_cast<int>(kv.get_int("category_min_count", c.analysis.category_min_count));
  c.analysis.bucket_count = static_cast<int>(kv.get_int("bucket_count", c.analysis.bucket_count));
  c.out = resolve(kv.get_or("out", "out"));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  const KeyValues kv = KeyValues::load(path);
  return from(kv, fs::absolute(path).parent_path());
}

void PipelineConfig::validate() const {
  if (!fs::is_directory(corpus_root)) throw ConfigError("corpus directory not found: " + corpus_root.string());
  if (!fs::is_regular_file(metadata)) throw ConfigError("metadata file not found: " + metadata.string());
  for (const auto* p : {&exclusions, &keywords, &truth_labels})
    if (*p && !fs::is_regular_file(**p)) throw ConfigError("file not found: " + (*p)->string());
  if (screenshot_extensions.empty()) throw ConfigError("screenshot_extensions is empty");
  if (heatmap_cols <= 0 || heatmap_rows <= 0) throw ConfigError("heatmap dimensions must be positive");
  if (!(margin_fraction >= 0 && margin_fraction <= 1)) throw ConfigError("margin_fraction must be in [0,1]");
  if (classifier == ClassifierMode::kExternal && external_command.empty())
    throw ConfigError("classifier = external needs external_command");
  if (!(external_threshold > 0 && external_threshold < 1)) throw ConfigError("external_threshold must be in (0,1)");
  if (!(train.decision_threshold > 0 && train.decision_threshold < 1))
    throw ConfigError("decision_threshold must be in (0,1)");
  if (train.input_size <= 0 || train.max_epochs <= 0 || train.patience <= 0)
    throw ConfigError("input_size, max_epochs and patience must be positive");
  if (analysis.bucket_count <= 0 || analysis.category_min_count < 0)
    throw ConfigError("bucket_count must be positive and category_min_count nonnegative");
}

std::vector<KeywordRule> PipelineConfig::rules() const { return keywords ? load_rules(*keywords) : default_rules(); }

// Stages -----------------------------------------------------------------------------

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kDetect: return "detect";
    case Stage::kHeatmap: return "heatmap";
    case Stage::kCrop: return "crop";
    case Stage::kTrain: return "train";
    case Stage::kVerify: return "verify";
    case Stage::kAnalyze: return "analyze";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

std::optional<Stage> stage_from_string(std::string_view name) {
  for (Stage s : kAllStages)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::vector<Stage> dependencies(Stage stage, const PipelineConfig& config) {
  switch (stage) {
    case Stage::kIngest: return {};
    case Stage::kDetect: return {Stage::kIngest};
    case Stage::kHeatmap: return {Stage::kIngest, Stage::kDetect};
    case Stage::kCrop: return {Stage::kIngest, Stage::kDetect, Stage::kHeatmap};
    case Stage::kTrain: return {Stage::kCrop};
    case Stage::kVerify:
      if (config.classifier == ClassifierMode::kReference) return {Stage::kIngest, Stage::kCrop, Stage::kTrain};
      return {Stage::kIngest, Stage::kCrop};
    case Stage::kAnalyze: return {Stage::kIngest, Stage::kVerify};
    case Stage::kReport: return {Stage::kIngest, Stage::kHeatmap, Stage::kCrop, Stage::kVerify, Stage::kAnalyze};
  }
  return {};
}

StageResult run_stage(Stage stage, const PipelineConfig& config, bool force) {
  const std::string name(to_string(stage));
  json manifest = read_manifest(config);
  json& stages = manifest["stages"];
  if (!stages.is_object()) stages = json::object();

  Hasher fp;
  fp.add(name);
  fp.add(stage_params(stage, config));
  json inputs = json::object();
  for (Stage dep : dependencies(stage, config)) {
    const std::string dname(to_string(dep));
    if (!stages.contains(dname) || !fs::is_directory(stage_dir(config, dep)))
      throw DependencyError(fmt::format("stage '{}' needs the outputs of '{}'; run `patternscope {}` first", name, dname, dname));
    const std::string h = stages[dname].value("output_hash", "");
    inputs[dname] = h;
    fp.add(dname);
    fp.add(h);
  }

  StageResult result{stage, false, fp.hex(), "", {}};
  const fs::path dir = stage_dir(config, stage);
  if (!force && stages.contains(name) && stages[name].value("fingerprint", "") == result.fingerprint &&
      fs::is_directory(dir) && hash_tree(dir) == stages[name].value("output_hash", "")) {
    result.skipped = true;
    result.output_hash = stages[name].value("output_hash", "");
    return result;
  }

  fs::create_directories(config.out);
  const fs::path tmp = config.out / ("." + name + ".tmp");
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    switch (stage) {
      case Stage::kIngest: result.notes = do_ingest(config, tmp); break;
      case Stage::kDetect: result.notes = do_detect(config, tmp); break;
      case Stage::kHeatmap: result.notes = do_heatmap(config, tmp); break;
      case Stage::kCrop: result.notes = do_crop(config, tmp); break;
      case Stage::kTrain: result.notes = do_train(config, tmp); break;
      case Stage::kVerify: result.notes = do_verify(config, tmp); break;
      case Stage::kAnalyze: result.notes = do_analyze(config, tmp); break;
      case Stage::kReport: result.notes = do_report(config, tmp); break;
    }
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);

  result.output_hash = hash_tree(dir);
  stages[name] = {{"fingerprint", result.fingerprint}, {"inputs", inputs}, {"output_hash", result.output_hash}};
  write_manifest(config, manifest);
  return result;
}

std::vector<StageResult> run_all(const PipelineConfig& config, bool force) {
  std::vector<StageResult> results;
  for (Stage s : kAllStages) {
    if (s == Stage::kTrain && config.classifier == ClassifierMode::kExternal) continue;
    results.push_back(run_stage(s, config, force));
  }
  return results;
}

// Artifact readers ---------------------------------------------------------------------

std::vector<AppRecord> read_ingested(const fs::path& ingest_dir, const fs::path& corpus_root, bool with_hierarchy) {
  const fs::path apps_path = ingest_dir / "apps.csv", screens_path = ingest_dir / "screens.csv";
  const csv::Table at = csv::read(apps_path);
  const int cp = at.require("package", apps_path), ce = at.require("exclusion", apps_path),
            cr = at.require("avg_rating", apps_path), ci = at.require("installs", apps_path),
            cc = at.require("category", apps_path);
  std::vector<AppRecord> apps;
  std::map<std::string, std::size_t> index;
  for (const auto& row : at.rows) {
    AppRecord a;
    a.package_id = row[static_cast<std::size_t>(cp)];
    a.exclusion = parse_exclusion(row[static_cast<std::size_t>(ce)]);
    if (!row[static_cast<std::size_t>(cr)].empty())
      a.metadata = AppMetadata{std::stod(row[static_cast<std::size_t>(cr)]),
                               std::stoull(row[static_cast<std::size_t>(ci)]), row[static_cast<std::size_t>(cc)]};
    index[a.package_id] = apps.size();
    apps.push_back(std::move(a));
  }

  const csv::Table st = csv::read(screens_path);
  const int sp = st.require("package", screens_path), ss = st.require("screen", screens_path),
            sh = st.require("hierarchy", screens_path), sf = st.require("screenshot", screens_path),
            sw = st.require("width", screens_path), sg = st.require("height", screens_path),
            vw = st.require("virtual_width", screens_path), vh = st.require("virtual_height", screens_path);
  for (const auto& row : st.rows) {
    auto cell = [&](int i) -> const std::string& { return row[static_cast<std::size_t>(i)]; };
    const auto it = index.find(cell(sp));
    if (it == index.end()) throw DataError("screens.csv names unknown package " + cell(sp));
    Screen s;
    if (with_hierarchy) s = parse_view_hierarchy(read_file(corpus_root / cell(sh)), cell(ss));
    s.screen_id = cell(ss);
    s.screenshot = {corpus_root / cell(sf), {std::stoi(cell(sw)), std::stoi(cell(sg))}};
    s.virtual_extent = {std::stoi(cell(vw)), std::stoi(cell(vh))};
    apps[it->second].screens.push_back(std::move(s));
  }
  return apps;
}

void write_detections(const fs::path& path, const std::map<std::string, AppDetections>& detections) {
  std::string text = "package,screen,kind,node_path,rect,via,keyword\n";
  for (const auto& [pkg, d] : detections)
    for (const auto& [k, list] : d)
      for (const Detection& det : list)
        text += csv::join({det.package_id, det.screen_id, std::string(to_string(det.kind)), format_node_path(det.node_path),
                           format_rect(det.bounds), std::string(to_string(det.matched_via)), det.matched_keyword}) +
                "\n";
  write_text(path, text);
}

std::map<std::string, AppDetections> read_detections(const fs::path& path) {
  const csv::Table t = csv::read(path);
  const int cp = t.require("package", path), cs = t.require("screen", path), ck = t.require("kind", path),
            cn = t.require("node_path", path), cr = t.require("rect", path), cv = t.require("via", path),
            cw = t.require("keyword", path);
  std::map<std::string, AppDetections> out;
  for (const auto& row : t.rows) {
    auto cell = [&](int i) -> const std::string& { return row[static_cast<std::size_t>(i)]; };
    Detection d{cell(cp), cell(cs), parse_kind(cell(ck)), parse_node_path(cell(cn)), parse_rect(cell(cr)),
                parse_match_source(cell(cv)), cell(cw)};
    out[d.package_id][d.kind].push_back(std::move(d));
  }
  return out;
}

std::string hash_hex(std::string_view bytes) {
  Hasher h;
  h.add(bytes);
  return h.hex();
}

std::string hash_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.emplace_back(e.path().lexically_relative(dir).generic_string(), e.path());
  std::sort(files.begin(), files.end());
  Hasher h;
  for (const auto& [rel, p] : files) {
    h.add(rel);
    h.add(read_file(p));
  }
  return h.hex();
}

}  // namespace patternscope
