// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/analytics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace patternscope {

namespace {

GroupSplit partition(const std::vector<MetricSample>& samples, Metric metric, double threshold) {
  GroupSplit split{metric, threshold, {}, {}};
  for (const auto& s : samples) (s.value >= threshold ? split.high_group : split.low_group).push_back(s.package_id);
  return split;
}

int count_users(const std::vector<std::string>& group, const std::function<bool(const std::string&)>& test) {
  return static_cast<int>(std::count_if(group.begin(), group.end(), test));
}

std::vector<UsagePredicate> all_predicates(const UsageMap& usage) {
  std::vector<UsagePredicate> preds;
  for (ComponentKind k : kAllKinds) preds.push_back(kind_predicate(k, usage));
  preds.push_back(material_predicate(usage));
  return preds;
}

}  // namespace

std::string_view to_string(Metric metric) {
  return metric == Metric::kAvgRating ? "avg_rating" : "installs";
}

std::vector<MetricSample> metric_samples(const std::vector<AppRecord>& apps, Metric metric) {
  std::vector<MetricSample> out;
  for (const auto& a : apps) {
    if (!a.analyzable()) continue;
    out.push_back({a.package_id, metric == Metric::kAvgRating ? a.metadata->avg_rating
                                                              : static_cast<double>(a.metadata->installs)});
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

GroupSplit split_by_median(const std::vector<MetricSample>& samples, Metric metric) {
  if (samples.size() < 2) throw DataError("median split needs at least 2 apps");
  std::vector<double> values;
  for (const auto& s : samples) values.push_back(s.value);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) throw DataError("median split is degenerate: all values identical");
  return partition(samples, metric, median(std::move(values)));
}

GroupSplit split_by_threshold(const std::vector<MetricSample>& samples, Metric metric, double threshold) {
  GroupSplit split = partition(samples, metric, threshold);
  if (split.low_group.empty() || split.high_group.empty())
    throw DataError("threshold split at " + std::to_string(threshold) + " leaves a group empty");
  return split;
}

double usage_rate(const std::vector<std::string>& group, ComponentKind kind, const UsageMap& usage) {
  if (group.empty()) throw DataError("usage rate of an empty group");
  const auto pred = kind_predicate(kind, usage);
  return static_cast<double>(count_users(group, pred.test)) / static_cast<double>(group.size());
}

bool material_usage(const UsageMap& usage, const std::string& package_id) {
  const auto it = usage.find(package_id);
  if (it == usage.end()) return false;
  return std::any_of(kAllKinds.begin(), kAllKinds.end(), [&](ComponentKind k) { return it->second.uses(k); });
}

UsagePredicate kind_predicate(ComponentKind kind, const UsageMap& usage) {
  return {std::string(to_string(kind)), [&usage, kind](const std::string& pkg) {
            const auto it = usage.find(pkg);
            return it != usage.end() && it->second.uses(kind);
          }};
}

UsagePredicate material_predicate(const UsageMap& usage) {
  return {std::string(kMaterialPredicate), [&usage](const std::string& pkg) { return material_usage(usage, pkg); }};
}

BucketCurve bucket_curve(const std::vector<MetricSample>& samples, Metric metric, int k,
                         const std::function<bool(const std::string&)>& predicate) {
  if (k <= 0) throw DataError("bucket count must be positive");
  const std::size_t n = samples.size();
  if (n < static_cast<std::size_t>(k))
    throw DataError(std::to_string(n) + " apps cannot fill " + std::to_string(k) +
                    " buckets; use a smaller bucket count");
  std::vector<MetricSample> sorted = samples;
  std::sort(sorted.begin(), sorted.end(), [](const MetricSample& a, const MetricSample& b) {
    return a.value != b.value ? a.value < b.value : a.package_id < b.package_id;
  });
  BucketCurve curve{metric, k, {}, {}, {}, {}};
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int b = 0; b < k; ++b) {
    const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
    int positives = 0;
    for (std::size_t i = pos; i < pos + size; ++i) positives += predicate(sorted[i].package_id) ? 1 : 0;
    curve.app_count.push_back(static_cast<int>(size));
    curve.positive_count.push_back(positives);
    curve.fraction.push_back(static_cast<double>(positives) / static_cast<double>(size));
    pos += size;
  }
  for (auto& s : sorted) curve.order.push_back(std::move(s.package_id));
  return curve;
}

CorrelationResult curve_correlation(const BucketCurve& curve) {
  const Eigen::ArrayXd index = Eigen::ArrayXd::LinSpaced(curve.k, 1.0, static_cast<double>(curve.k));
  const Eigen::Map<const Eigen::ArrayXd> fraction(curve.fraction.data(), static_cast<Eigen::Index>(curve.fraction.size()));
  return pearson(index, fraction);
}

std::vector<CategoryRate> category_rates(const std::vector<AppRecord>& apps, ComponentKind kind,
                                         const UsageMap& usage, int min_count) {
  std::map<std::string, CategoryRate> by_cat;
  const auto pred = kind_predicate(kind, usage);
  for (const auto& a : apps) {
    if (!a.analyzable()) continue;
    auto& row = by_cat[a.metadata->category];
    row.category = a.metadata->category;
    ++row.app_count;
    row.users += pred.test(a.package_id) ? 1 : 0;
  }
  std::vector<CategoryRate> out;
  for (auto& [name, row] : by_cat) {
    if (row.app_count < min_count) continue;
    row.rate = static_cast<double>(row.users) / row.app_count;
    out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const CategoryRate& a, const CategoryRate& b) {
    return a.rate != b.rate ? a.rate > b.rate : a.category < b.category;
  });
  return out;
}

AnalysisResults analyze(const std::vector<AppRecord>& apps, const UsageMap& usage,
                        const AnalysisOptions& options) {
  AnalysisResults res;
  const auto preds = all_predicates(usage);

  for (Metric metric : {Metric::kAvgRating, Metric::kInstalls}) {
    const auto samples = metric_samples(apps, metric);
    res.analyzable = samples.size();
    const std::string mname(to_string(metric));

    try {
      res.splits.emplace(metric, metric == Metric::kAvgRating
                                     ? split_by_median(samples, metric)
                                     : split_by_threshold(samples, metric, options.install_threshold));
    } catch (const DataError& e) {
      res.notes.push_back(mname + " split skipped: " + e.what());
    }
    if (auto it = res.splits.find(metric); it != res.splits.end()) {
      const GroupSplit& split = it->second;
      for (const auto& p : preds) {
        GroupUsageRow row{metric, p.name, split.threshold, static_cast<int>(split.low_group.size()),
                          count_users(split.low_group, p.test), static_cast<int>(split.high_group.size()),
                          count_users(split.high_group, p.test), 0, 0, std::nullopt};
        row.low_rate = static_cast<double>(row.low_users) / row.low_n;
        row.high_rate = static_cast<double>(row.high_users) / row.high_n;
        if (row.low_users + row.high_users > 0)
          row.high_share = static_cast<double>(row.high_users) / (row.low_users + row.high_users);
        res.group_usage.push_back(row);
      }
    }

    for (const auto& p : preds) {
      std::vector<double> users, others;
      for (const auto& s : samples) (p.test(s.package_id) ? users : others).push_back(s.value);
      if (!users.empty()) res.box_plots.push_back({metric, p.name, true, five_number_summary(users)});
      if (!others.empty()) res.box_plots.push_back({metric, p.name, false, five_number_summary(others)});
    }

    for (const auto& p : preds) {
      try {
        CurveRow row{p.name, bucket_curve(samples, metric, options.bucket_count, p.test), std::nullopt};
        try {
          row.correlation = curve_correlation(row.curve);
        } catch (const DataError& e) {
          res.notes.push_back(mname + "/" + p.name + " correlation skipped: " + e.what());
        }
        res.curves.push_back(std::move(row));
      } catch (const DataError& e) {
        res.notes.push_back(mname + "/" + p.name + " bucket curve skipped: " + e.what());
      }
    }
  }

  for (ComponentKind k : kAllKinds)
    res.categories.push_back({std::string(to_string(k)), category_rates(apps, k, usage, options.category_min_count)});
  return res;
}

}  // namespace patternscope
