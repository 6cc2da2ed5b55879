// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "patternscope/crop.hpp"
#include "patternscope/error.hpp"
#include "patternscope/usage.hpp"

namespace patternscope {

inline constexpr int kDefaultInputSize = 32;
inline constexpr double kDefaultDecisionThreshold = 0.5;

/// Area-downsampled RGB pixels in [0,1], flattened channel-major to
/// 3 * input_size^2 values.
Eigen::VectorXd crop_features(const Image8& crop, int input_size);

/// One labeled training example, features already extracted.
struct TrainingSample {
  std::string package_id;
  Eigen::VectorXd features;
  int label = 0;  // 1 = component, 0 = not
};

/// App-level partition: every sample of one app lands in one partition.
struct DatasetSplit {
  std::vector<std::size_t> train, validation, test;  // indices into the samples
  std::vector<std::string> train_apps, validation_apps, test_apps;
  double train_fraction = 0, validation_fraction = 0, test_fraction = 0;  // by app count
};

inline constexpr std::size_t kMinSplitApps = 10;

/// 80/10/10 by app after a seeded shuffle of the sorted app list. If the
/// training partition lacks a label, successive derived seeds are tried.
/// Throws DataError on single-label input or fewer than 10 apps.
DatasetSplit split_dataset(const std::vector<TrainingSample>& samples, std::uint64_t seed);

struct TrainConfig {
  int input_size = kDefaultInputSize;
  double decision_threshold = kDefaultDecisionThreshold;
  bool tune_threshold = false;
  double learning_rate = 0.01;  // Adam step
  double l2 = 1e-3;
  int max_epochs = 300;
  int patience = 25;
  /// Validation balanced accuracy at or below 0.5 + chance_margin is a failure.
  double chance_margin = 0.1;
  std::uint64_t seed = 0;
};

struct ClassifierMetrics {
  std::size_t n = 0;
  std::size_t positives = 0;
  double accuracy = 0;
  double balanced_accuracy = 0;
  double precision = 0;
  double recall = 0;
};

struct TrainReport {
  ComponentKind kind;
  std::size_t train_samples = 0, validation_samples = 0, test_samples = 0;
  int epochs = 0;
  double threshold = 0;
  ClassifierMetrics train, validation, test;
};

/// Binary logistic regression over standardized crop features.
struct VerifierModel {
  static constexpr int kFormatVersion = 1;

  ComponentKind kind = ComponentKind::kAppBar;
  int input_size = kDefaultInputSize;
  double threshold = kDefaultDecisionThreshold;
  std::uint64_t seed = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd inv_std;
  Eigen::VectorXd weights;
  double bias = 0;

  double score_features(const Eigen::VectorXd& features) const;
  /// Probability-like score in [0, 1]; resizes the crop to input_size.
  double score(const Image8& crop) const;
  bool positive(double s) const { return s >= threshold; }
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, TrainReport report)
      : Error(ErrorClass::kTraining, what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

/// Full-batch Adam on class-weighted logistic loss with L2, early stopping on
/// validation loss. Deterministic for fixed inputs.
std::pair<VerifierModel, TrainReport> train(const std::vector<TrainingSample>& samples,
                                            const DatasetSplit& split, ComponentKind kind,
                                            const TrainConfig& config);

ClassifierMetrics evaluate(const VerifierModel& model, const std::vector<TrainingSample>& samples,
                           const std::vector<std::size_t>& indices);

/// Plain-text header (format, kind, input_size, threshold, seed, features)
/// followed by a binary block of doubles: mean, inv_std, weights, bias.
void save_model(const std::filesystem::path& path, const VerifierModel& model);
VerifierModel load_model(const std::filesystem::path& path);

using ModelSet = std::map<ComponentKind, VerifierModel>;
/// `<dir>/<Kind>.model` for each kind present.
ModelSet load_models(const std::filesystem::path& dir);

// Aggregation ------------------------------------------------------------------

struct ScoredCrop {
  ComponentKind kind;
  double score = 0;
  double threshold = kDefaultDecisionThreshold;
};

/// Any-positive rule: an app uses a kind iff at least one of its candidate
/// crops of that kind scores at or above threshold. All six kinds are present
/// in the result.
AppComponentUsage aggregate_usage(const std::string& package_id, const std::vector<ScoredCrop>& scored);

/// Scores every candidate crop with the kind's model and aggregates. Throws
/// DataError when a kind with candidates has no model.
AppComponentUsage verify_app(const std::string& package_id, const std::vector<CropSample>& candidates,
                             const ModelSet& models);

// External scorer ------------------------------------------------------------

/// Protocol: the batch directory holds `<id>.png` crops and `manifest.csv`
/// (id,kind). The command is run with the directory appended as its last
/// argument and must write `scores.csv` (id,score) there and exit 0.
struct ExternalScorer {
  std::string command;
  std::map<ComponentKind, double> thresholds;  // default kDefaultDecisionThreshold

  double threshold(ComponentKind kind) const {
    const auto it = thresholds.find(kind);
    return it == thresholds.end() ? kDefaultDecisionThreshold : it->second;
  }
};

struct CropRef {
  ComponentKind kind;
  const Image8* image;
};

/// Writes the batch, runs the scorer, returns one score per crop in input
/// order. Throws ExternalScorerError on nonzero exit, a missing or extra id, or
/// a score outside [0,1].
std::vector<double> external_verify(const std::vector<CropRef>& batch, const ExternalScorer& scorer,
                                    const std::filesystem::path& exchange_dir);

/// The reference scorer side of the protocol: reads a batch directory, scores
/// each crop with `models`, writes scores.csv.
void score_batch_directory(const std::filesystem::path& dir, const ModelSet& models);

// Crop ground truth ------------------------------------------------------------

/// (package, screen, node_path) -> whether the crop shows the component.
using CropTruth = std::map<std::tuple<std::string, std::string, std::string>, bool>;

/// Reads node_truth.csv (package,screen,node_path,kind,role); role "planted"
/// is a positive, "decoy" and "occluded" are negatives.
CropTruth load_crop_truth(const std::filesystem::path& path);

/// Training label for a crop: negatives are 0; candidates take the truth
/// label when one is known and 1 otherwise.
int training_label(CropLabel label, const CropSource& source, const CropTruth* truth);

}  // namespace patternscope
