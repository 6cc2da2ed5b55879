// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patternscope/corpus.hpp"
#include "patternscope/stats.hpp"
#include "patternscope/usage.hpp"

namespace patternscope {

enum class Metric { kAvgRating, kInstalls };
std::string_view to_string(Metric metric);

inline constexpr double kDefaultInstallThreshold = 1'000'000;
inline constexpr int kDefaultCategoryMinCount = 20;
inline constexpr int kDefaultBucketCount = 100;

struct MetricSample {
  std::string package_id;
  double value = 0;
};

/// One sample per analyzable app, in corpus order.
std::vector<MetricSample> metric_samples(const std::vector<AppRecord>& apps, Metric metric);

/// Apps with value >= threshold are high, the rest low.
struct GroupSplit {
  Metric metric;
  double threshold = 0;
  std::vector<std::string> low_group;
  std::vector<std::string> high_group;
};

double median(std::vector<double> values);

/// Threshold is the sample median; ties at the median go to the high group.
/// Throws DataError for fewer than 2 samples or all-identical values.
GroupSplit split_by_median(const std::vector<MetricSample>& samples, Metric metric);
/// Throws DataError when either side would be empty.
GroupSplit split_by_threshold(const std::vector<MetricSample>& samples, Metric metric, double threshold);

/// Fraction of `group` apps using `kind`. Throws DataError on an empty group.
double usage_rate(const std::vector<std::string>& group, ComponentKind kind, const UsageMap& usage);

/// True when the app uses any of the six components.
bool material_usage(const UsageMap& usage, const std::string& package_id);

/// Predicate over apps, e.g. "uses FAB" or "uses any component".
struct UsagePredicate {
  std::string name;
  std::function<bool(const std::string&)> test;
};
UsagePredicate kind_predicate(ComponentKind kind, const UsageMap& usage);
UsagePredicate material_predicate(const UsageMap& usage);

/// Apps sorted ascending by metric (ties by package id), cut into k
/// contiguous buckets whose sizes differ by at most one; the remainder goes to
/// the lowest buckets.
struct BucketCurve {
  Metric metric;
  int k = 0;
  std::vector<double> fraction;
  std::vector<int> app_count;
  std::vector<int> positive_count;
  /// Package ids in sorted order; bucket b covers a contiguous slice.
  std::vector<std::string> order;
};

/// Throws DataError when there are fewer samples than buckets.
BucketCurve bucket_curve(const std::vector<MetricSample>& samples, Metric metric, int k,
                         const std::function<bool(const std::string&)>& predicate);

/// Pearson correlation of the curve against bucket index 1..k.
CorrelationResult curve_correlation(const BucketCurve& curve);

struct CategoryRate {
  std::string category;
  int app_count = 0;
  int users = 0;
  double rate = 0;
};

/// Usage rate of `kind` per category over analyzable apps, keeping categories
/// with at least `min_count` apps; sorted by rate descending, then name.
std::vector<CategoryRate> category_rates(const std::vector<AppRecord>& apps, ComponentKind kind,
                                         const UsageMap& usage, int min_count);

// Full analysis --------------------------------------------------------------

struct AnalysisOptions {
  double install_threshold = kDefaultInstallThreshold;
  int category_min_count = kDefaultCategoryMinCount;
  int bucket_count = kDefaultBucketCount;
};

struct GroupUsageRow {
  Metric metric;
  std::string predicate;
  double threshold = 0;
  int low_n = 0, low_users = 0;
  int high_n = 0, high_users = 0;
  double low_rate = 0, high_rate = 0;
  /// Share of all users that fall in the high group (nullopt when no users).
  std::optional<double> high_share;
};

struct BoxPlotRow {
  Metric metric;
  std::string predicate;
  bool uses = false;
  FiveNumberSummary summary;
};

struct CurveRow {
  std::string predicate;
  BucketCurve curve;
  std::optional<CorrelationResult> correlation;
};

struct CategoryRow {
  std::string predicate;
  std::vector<CategoryRate> rates;
};

struct AnalysisResults {
  std::size_t analyzable = 0;
  std::map<Metric, GroupSplit> splits;
  std::vector<GroupUsageRow> group_usage;
  std::vector<BoxPlotRow> box_plots;
  std::vector<CurveRow> curves;
  std::vector<CategoryRow> categories;
  std::vector<std::string> notes;
};

/// Rating split at the median, install split at the threshold, per-kind and
/// any-component usage rates, box plots, category rankings, and bucket curves
/// with their correlation. Stages that cannot run on the data (too few apps for
/// k buckets, degenerate split) are skipped with a note.
AnalysisResults analyze(const std::vector<AppRecord>& apps, const UsageMap& usage,
                        const AnalysisOptions& options = {});

inline constexpr std::string_view kMaterialPredicate = "MaterialDesign";

}  // namespace patternscope
