// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/verifier.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "patternscope/csv.hpp"

namespace patternscope {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd gather(const std::vector<TrainingSample>& samples, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return {};
  const Eigen::Index d = samples[idx.front()].features.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), d);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& f = samples[idx[i]].features;
    if (f.size() != d) throw DataError("training samples have inconsistent feature sizes");
    x.row(static_cast<Eigen::Index>(i)) = f.transpose();
  }
  return x;
}

Eigen::VectorXd labels_of(const std::vector<TrainingSample>& samples, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) y(static_cast<Eigen::Index>(i)) = samples[idx[i]].label;
  return y;
}

// Per-sample weights giving both classes equal total mass.
Eigen::VectorXd class_weights(const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const double pos = y.sum();
  const double neg = n - pos;
  Eigen::VectorXd w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    w(i) = y(i) > 0.5 ? (pos > 0 ? n / (2 * pos) : 0) : (neg > 0 ? n / (2 * neg) : 0);
  return w;
}

Eigen::VectorXd probabilities(const Eigen::MatrixXd& xs, const Eigen::VectorXd& w, double b) {
  Eigen::VectorXd z = (xs * w).array() + b;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

double weighted_log_loss(const Eigen::VectorXd& p, const Eigen::VectorXd& y, const Eigen::VectorXd& cw) {
  constexpr double kEps = 1e-12;
  double loss = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    loss -= cw(i) * (y(i) > 0.5 ? std::log(std::max(p(i), kEps)) : std::log(std::max(1 - p(i), kEps)));
  const double total = cw.sum();
  return total > 0 ? loss / total : 0;
}

ClassifierMetrics metrics_from(const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
  ClassifierMetrics m;
  m.n = scores.size();
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i]) (pred ? tp : fn)++;
    else (pred ? fp : tn)++;
  }
  m.positives = tp + fn;
  if (m.n == 0) return m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.n);
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  const double tnr = tn + fp ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 1.0;
  if (tp + fn == 0) m.balanced_accuracy = tnr;
  else if (tn + fp == 0) m.balanced_accuracy = m.recall;
  else m.balanced_accuracy = 0.5 * (m.recall + tnr);
  return m;
}

double tune(const std::vector<double>& scores, const std::vector<int>& labels, double fallback) {
  std::vector<double> sorted(scores);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  double best_t = fallback;
  double best = metrics_from(scores, labels, fallback).balanced_accuracy;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double t = std::clamp(0.5 * (sorted[i] + sorted[i + 1]), 0.01, 0.99);
    const double acc = metrics_from(scores, labels, t).balanced_accuracy;
    if (acc > best || (acc == best && std::abs(t - 0.5) < std::abs(best_t - 0.5))) {
      best = acc;
      best_t = t;
    }
  }
  return best_t;
}

void write_doubles(std::ostream& out, const Eigen::VectorXd& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd read_doubles(std::istream& in, Eigen::Index n, const std::filesystem::path& path) {
  Eigen::VectorXd v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("model file truncated: " + path.string());
  return v;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  return out + "'";
}

std::string batch_id(std::size_t i) { return fmt::format("c{:06d}", i); }

}  // namespace

Eigen::VectorXd crop_features(const Image8& crop, int input_size) {
  if (crop.empty()) throw DataError("cannot extract features from an empty crop");
  const ImageF small = resize_area(crop, input_size, input_size);
  const Eigen::Index plane = static_cast<Eigen::Index>(input_size) * input_size;
  Eigen::VectorXd f(3 * plane);
  for (int c = 0; c < 3; ++c)
    f.segment(c * plane, plane) = Eigen::Map<const Eigen::VectorXf>(small.planes[c].data(), plane).cast<double>() / 255.0;
  return f;
}

DatasetSplit split_dataset(const std::vector<TrainingSample>& samples, std::uint64_t seed) {
  std::set<std::string> app_set;
  bool has_pos = false, has_neg = false;
  for (const auto& s : samples) {
    app_set.insert(s.package_id);
    (s.label ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DataError("dataset split needs both labels");
  if (app_set.size() < kMinSplitApps)
    throw DataError(fmt::format("dataset split needs samples from at least {} apps, got {}", kMinSplitApps,
                                app_set.size()));

  const std::vector<std::string> apps(app_set.begin(), app_set.end());
  const std::size_t n = apps.size();
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));

  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::string> order = apps;
    std::mt19937_64 rng(seed + attempt * 0x9E3779B97F4A7C15ULL);
    std::shuffle(order.begin(), order.end(), rng);
    std::map<std::string, int> part;
    for (std::size_t i = 0; i < n; ++i) part[order[i]] = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);

    DatasetSplit split;
    bool train_pos = false, train_neg = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const int p = part[samples[i].package_id];
      (p == 0 ? split.train : p == 1 ? split.validation : split.test).push_back(i);
      if (p == 0) (samples[i].label ? train_pos : train_neg) = true;
    }
    if (!train_pos || !train_neg) continue;
    for (std::size_t i = 0; i < n; ++i)
      (i < n_train ? split.train_apps : i < n_train + n_val ? split.validation_apps : split.test_apps)
          .push_back(order[i]);
    for (auto* v : {&split.train_apps, &split.validation_apps, &split.test_apps}) std::sort(v->begin(), v->end());
    split.train_fraction = static_cast<double>(split.train_apps.size()) / static_cast<double>(n);
    split.validation_fraction = static_cast<double>(split.validation_apps.size()) / static_cast<double>(n);
    split.test_fraction = static_cast<double>(split.test_apps.size()) / static_cast<double>(n);
    return split;
  }
  throw DataError("could not find a split whose training partition has both labels");
}

double VerifierModel::score_features(const Eigen::VectorXd& features) const {
  if (features.size() != weights.size()) throw DataError("feature size does not match the model");
  const Eigen::VectorXd z = (features - mean).cwiseProduct(inv_std);
  return sigmoid(z.dot(weights) + bias);
}

double VerifierModel::score(const Image8& crop) const { return score_features(crop_features(crop, input_size)); }

ClassifierMetrics evaluate(const VerifierModel& model, const std::vector<TrainingSample>& samples,
                           const std::vector<std::size_t>& indices) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i : indices) {
    scores.push_back(model.score_features(samples[i].features));
    labels.push_back(samples[i].label);
  }
  return metrics_from(scores, labels, model.threshold);
}

std::pair<VerifierModel, TrainReport> train(const std::vector<TrainingSample>& samples, const DatasetSplit& split,
                                            ComponentKind kind, const TrainConfig& config) {
  if (split.train.empty()) throw DataError("empty training partition");
  const Eigen::MatrixXd raw_train = gather(samples, split.train);
  const Eigen::Index d = raw_train.cols();

  VerifierModel model;
  model.kind = kind;
  model.input_size = config.input_size;
  model.threshold = config.decision_threshold;
  model.seed = config.seed;
  model.mean = raw_train.colwise().mean().transpose();
  const Eigen::VectorXd var = (raw_train.rowwise() - model.mean.transpose()).array().square().colwise().mean().transpose();
  model.inv_std = var.unaryExpr([](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 0.0; });

  auto standardize = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    if (x.size() == 0) return x;
    return (x.rowwise() - model.mean.transpose()).array().rowwise() * model.inv_std.transpose().array();
  };
  const Eigen::MatrixXd xt = standardize(raw_train);
  const Eigen::VectorXd yt = labels_of(samples, split.train);
  const Eigen::VectorXd cwt = class_weights(yt);
  const Eigen::MatrixXd xv = standardize(gather(samples, split.validation));
  const Eigen::VectorXd yv = labels_of(samples, split.validation);
  const Eigen::VectorXd cwv = class_weights(yv);
  const double wsum = cwt.sum();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0;
  Eigen::VectorXd m_w = Eigen::VectorXd::Zero(d), v_w = Eigen::VectorXd::Zero(d);
  double m_b = 0, v_b = 0;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;

  Eigen::VectorXd best_w = w;
  double best_b = b;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  int epoch = 0;
  for (epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const Eigen::VectorXd p = probabilities(xt, w, b);
    const Eigen::VectorXd r = cwt.cwiseProduct(p - yt) / wsum;
    const Eigen::VectorXd gw = xt.transpose() * r + config.l2 * w;
    const double gb = r.sum();
    m_w = kBeta1 * m_w + (1 - kBeta1) * gw;
    v_w = kBeta2 * v_w + (1 - kBeta2) * gw.cwiseProduct(gw);
    m_b = kBeta1 * m_b + (1 - kBeta1) * gb;
    v_b = kBeta2 * v_b + (1 - kBeta2) * gb * gb;
    const double c1 = 1 - std::pow(kBeta1, epoch);
    const double c2 = 1 - std::pow(kBeta2, epoch);
    w -= (config.learning_rate * (m_w / c1).array() / ((v_w / c2).array().sqrt() + kAdamEps)).matrix();
    b -= config.learning_rate * (m_b / c1) / (std::sqrt(v_b / c2) + kAdamEps);

    const double loss = xv.rows() > 0 ? weighted_log_loss(probabilities(xv, w, b), yv, cwv)
                                      : weighted_log_loss(probabilities(xt, w, b), yt, cwt);
    if (loss < best_loss - 1e-9) {
      best_loss = loss;
      best_w = w;
      best_b = b;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.weights = best_w;
  model.bias = best_b;

  if (config.tune_threshold && !split.validation.empty()) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i : split.validation) {
      scores.push_back(model.score_features(samples[i].features));
      labels.push_back(samples[i].label);
    }
    model.threshold = tune(scores, labels, config.decision_threshold);
  }

  TrainReport report;
  report.kind = kind;
  report.train_samples = split.train.size();
  report.validation_samples = split.validation.size();
  report.test_samples = split.test.size();
  report.epochs = std::min(epoch, config.max_epochs);
  report.threshold = model.threshold;
  report.train = evaluate(model, samples, split.train);
  report.validation = evaluate(model, samples, split.validation);
  report.test = evaluate(model, samples, split.test);

  if (!split.validation.empty() && report.validation.balanced_accuracy <= 0.5 + config.chance_margin)
    throw TrainingError(fmt::format("{} classifier failed to learn: validation balanced accuracy {:.3f} "
                                    "(accuracy {:.3f}, {} samples, {} positive)",
                                    to_string(kind), report.validation.balanced_accuracy,
                                    report.validation.accuracy, report.validation.n, report.validation.positives),
                        report);
  return {std::move(model), report};
}

void save_model(const std::filesystem::path& path, const VerifierModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model " + path.string());
  out << "patternscope-verifier-model " << VerifierModel::kFormatVersion << "\n"
      << "kind " << to_string(model.kind) << "\n"
      << "input_size " << model.input_size << "\n"
      << "threshold " << fmt::format("{:.17g}", model.threshold) << "\n"
      << "seed " << model.seed << "\n"
      << "features " << model.weights.size() << "\n"
      << "end\n";
  write_doubles(out, model.mean);
  write_doubles(out, model.inv_std);
  write_doubles(out, model.weights);
  out.write(reinterpret_cast<const char*>(&model.bias), sizeof(double));
  if (!out) throw IoError("cannot write model " + path.string());
}

VerifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != fmt::format("patternscope-verifier-model {}", VerifierModel::kFormatVersion))
    throw DataError("not a verifier model (or unsupported version): " + path.string());
  VerifierModel model;
  Eigen::Index features = -1;
  while (std::getline(in, line) && line != "end") {
    std::istringstream ls(line);
    std::string key, value;
    ls >> key >> value;
    if (key == "kind") model.kind = parse_kind(value);
    else if (key == "input_size") model.input_size = std::stoi(value);
    else if (key == "threshold") model.threshold = std::stod(value);
    else if (key == "seed") model.seed = std::stoull(value);
    else if (key == "features") features = std::stol(value);
  }
  if (line != "end" || features <= 0 || model.input_size <= 0 ||
      features != 3 * static_cast<Eigen::Index>(model.input_size) * model.input_size)
    throw DataError("malformed model header: " + path.string());
  if (!(model.threshold > 0 && model.threshold < 1)) throw DataError("model threshold outside (0,1): " + path.string());
  model.mean = read_doubles(in, features, path);
  model.inv_std = read_doubles(in, features, path);
  model.weights = read_doubles(in, features, path);
  in.read(reinterpret_cast<char*>(&model.bias), sizeof(double));
  if (!in) throw DataError("model file truncated: " + path.string());
  return model;
}

ModelSet load_models(const std::filesystem::path& dir) {
  ModelSet models;
  for (ComponentKind k : kAllKinds) {
    const auto p = dir / (std::string(to_string(k)) + ".model");
    if (std::filesystem::exists(p)) models.emplace(k, load_model(p));
  }
  return models;
}

AppComponentUsage aggregate_usage(const std::string& package_id, const std::vector<ScoredCrop>& scored) {
  AppComponentUsage usage{package_id, {}};
  for (ComponentKind k : kAllKinds) usage.kinds[k];
  for (const auto& s : scored) {
    KindUsage& u = usage.kinds[s.kind];
    ++u.candidate_count;
    if (s.score >= s.threshold) ++u.verified_count;
    u.uses = u.verified_count >= 1;
  }
  return usage;
}

AppComponentUsage verify_app(const std::string& package_id, const std::vector<CropSample>& candidates,
                             const ModelSet& models) {
  std::vector<ScoredCrop> scored;
  for (const auto& c : candidates) {
    if (c.label != CropLabel::kCandidate) continue;
    const auto it = models.find(c.kind);
    if (it == models.end())
      throw DataError(fmt::format("no verifier model for {} but {} has candidates", to_string(c.kind), package_id));
    scored.push_back({c.kind, it->second.score(c.image), it->second.threshold});
  }
  return aggregate_usage(package_id, scored);
}

std::vector<double> external_verify(const std::vector<CropRef>& batch, const ExternalScorer& scorer,
                                    const std::filesystem::path& exchange_dir) {
  namespace fs = std::filesystem;
  if (scorer.command.empty()) throw ConfigError("external scorer command is not configured");
  fs::remove_all(exchange_dir);
  fs::create_directories(exchange_dir);
  {
    std::ofstream manifest(exchange_dir / "manifest.csv", std::ios::binary);
    manifest << "id,kind\n";
    for (std::size_t i = 0; i < batch.size(); ++i) {
      write_image(exchange_dir / (batch_id(i) + ".png"), *batch[i].image);
      manifest << batch_id(i) << "," << to_string(batch[i].kind) << "\n";
    }
    if (!manifest) throw IoError("cannot write batch manifest in " + exchange_dir.string());
  }
  const std::string cmd = scorer.command + " " + shell_quote(exchange_dir.string());
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw ExternalScorerError(fmt::format("external scorer failed (status {}): {}", status, cmd));

  const fs::path scores_path = exchange_dir / "scores.csv";
  if (!fs::exists(scores_path)) throw ExternalScorerError("external scorer wrote no scores.csv");
  const csv::Table t = csv::read(scores_path);
  const int cid = t.column("id"), cscore = t.column("score");
  if (cid < 0 || cscore < 0) throw ExternalScorerError("scores.csv needs id and score columns");
  std::map<std::string, double> by_id;
  for (const auto& row : t.rows) {
    if (row.size() <= static_cast<std::size_t>(std::max(cid, cscore)))
      throw ExternalScorerError("short row in scores.csv");
    double s = 0;
    try {
      s = std::stod(row[cscore]);
    } catch (const std::exception&) {
      throw ExternalScorerError("unparseable score '" + row[cscore] + "'");
    }
    if (!(s >= 0.0 && s <= 1.0)) throw ExternalScorerError("score outside [0,1] for " + row[cid]);
    if (!by_id.emplace(row[cid], s).second) throw ExternalScorerError("duplicate id in scores.csv: " + row[cid]);
  }
  if (by_id.size() != batch.size())
    throw ExternalScorerError(fmt::format("external scorer returned {} scores for {} crops", by_id.size(), batch.size()));
  std::vector<double> scores;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto it = by_id.find(batch_id(i));
    if (it == by_id.end()) throw ExternalScorerError("no score for " + batch_id(i));
    scores.push_back(it->second);
  }
  return scores;
}

void score_batch_directory(const std::filesystem::path& dir, const ModelSet& models) {
  const csv::Table t = csv::read(dir / "manifest.csv");
  const int cid = t.require("id", dir / "manifest.csv");
  const int ckind = t.require("kind", dir / "manifest.csv");
  std::ofstream out(dir / "scores.csv", std::ios::binary);
  out << "id,score\n";
  for (const auto& row : t.rows) {
    const ComponentKind kind = parse_kind(row[ckind]);
    const auto it = models.find(kind);
    if (it == models.end()) throw DataError("no model for kind " + row[ckind]);
    const double s = it->second.score(read_image(dir / (row[cid] + ".png")));
    out << row[cid] << "," << fmt::format("{:.17g}", s) << "\n";
  }
  if (!out) throw IoError("cannot write scores.csv in " + dir.string());
}

CropTruth load_crop_truth(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const int cp = t.require("package", path), cs = t.require("screen", path), cn = t.require("node_path", path),
            cr = t.require("role", path);
  CropTruth truth;
  for (const auto& row : t.rows) truth[{row[cp], row[cs], row[cn]}] = row[cr] == "planted";
  return truth;
}

int training_label(CropLabel label, const CropSource& source, const CropTruth* truth) {
  if (label == CropLabel::kNegative) return 0;
  if (truth && source.node_path) {
    const auto it = truth->find({source.package_id, source.screen_id, format_node_path(*source.node_path)});
    if (it != truth->end()) return it->second ? 1 : 0;
  }
  return 1;
}

void write_usage(const std::filesystem::path& path, const UsageMap& usage) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "package,kind,candidate_count,verified_count,uses\n";
  for (const auto& [pkg, u] : usage)
    for (const auto& [kind, k] : u.kinds)
      out << csv::escape(pkg) << "," << to_string(kind) << "," << k.candidate_count << "," << k.verified_count << ","
          << (k.uses ? 1 : 0) << "\n";
}

UsageMap read_usage(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const int cp = t.require("package", path), ck = t.require("kind", path), cc = t.require("candidate_count", path),
            cv = t.require("verified_count", path), cu = t.require("uses", path);
  UsageMap usage;
  for (const auto& row : t.rows) {
    auto& app = usage[row[cp]];
    app.package_id = row[cp];
    app.kinds[parse_kind(row[ck])] = {std::stoi(row[cc]), std::stoi(row[cv]), row[cu] == "1"};
  }
  return usage;
}

}  // namespace patternscope
