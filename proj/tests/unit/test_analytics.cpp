// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "patternscope/analytics.hpp"
#include "patternscope/error.hpp"
#include "patternscope/synth.hpp"

using namespace patternscope;

namespace {

std::vector<MetricSample> samples(const std::vector<double>& values) {
  std::vector<MetricSample> out;
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back({"app" + std::to_string(i), values[i]});
  return out;
}

UsageMap usage_with(const std::vector<std::string>& ids, ComponentKind kind, const std::set<std::string>& users) {
  UsageMap m;
  for (const auto& id : ids) {
    AppComponentUsage u{id, {}};
    for (ComponentKind k : kAllKinds) {
      const bool on = k == kind && users.count(id);
      u.kinds[k] = {on ? 1 : 0, on ? 1 : 0, on};
    }
    m[id] = u;
  }
  return m;
}

AppRecord app(std::string id, double rating, std::uint64_t installs, std::string category) {
  AppRecord a;
  a.package_id = std::move(id);
  a.metadata = AppMetadata{rating, installs, std::move(category)};
  return a;
}

}  // namespace

TEST_SUITE("analytics") {

TEST_CASE("median split: even count and ties") {
  auto s = split_by_median(samples({1, 2, 3, 4}), Metric::kAvgRating);
  CHECK(s.threshold == 2.5);
  CHECK(s.low_group == std::vector<std::string>{"app0", "app1"});
  CHECK(s.high_group == std::vector<std::string>{"app2", "app3"});

  s = split_by_median(samples({4.16, 4.16, 3.0, 5.0}), Metric::kAvgRating);
  CHECK(s.threshold == 4.16);
  CHECK(s.low_group == std::vector<std::string>{"app2"});
  CHECK(s.high_group == std::vector<std::string>{"app0", "app1", "app3"});

  CHECK_THROWS_AS(split_by_median(samples({3, 3, 3}), Metric::kAvgRating), DataError);
  CHECK_THROWS_AS(split_by_median(samples({3}), Metric::kAvgRating), DataError);
}

TEST_CASE("threshold split on install lower bounds") {
  const auto s = split_by_threshold(samples({10, 1e6}), Metric::kInstalls, 1e6);
  CHECK(s.low_group.size() == 1);
  CHECK(s.high_group.size() == 1);
  CHECK(s.high_group[0] == "app1");
  CHECK_THROWS_AS(split_by_threshold(samples({10, 20}), Metric::kInstalls, 1e6), DataError);
}

TEST_CASE("split partitions exactly and membership follows the threshold") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> r(10, 50);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(2 + i % 30);
    for (double& x : v) x = r(rng) / 10.0;
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) continue;
    const auto ss = samples(v);
    const auto s = split_by_median(ss, Metric::kAvgRating);
    CHECK(s.low_group.size() + s.high_group.size() == v.size());
    for (const auto& m : ss) {
      const bool high = std::find(s.high_group.begin(), s.high_group.end(), m.package_id) != s.high_group.end();
      CHECK(high == (m.value >= s.threshold));
    }
  }
}

TEST_CASE("usage rate and material usage") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("a" + std::to_string(i));
  const auto u = usage_with(ids, ComponentKind::kFloatingActionButton, {"a1", "a4", "a7"});
  CHECK(usage_rate(ids, ComponentKind::kFloatingActionButton, u) == doctest::Approx(0.3));
  CHECK(usage_rate(ids, ComponentKind::kSnackBar, u) == 0.0);
  CHECK_THROWS_AS(usage_rate({}, ComponentKind::kSnackBar, u), DataError);

  CHECK_FALSE(material_usage(usage_with({"x"}, ComponentKind::kSnackBar, {}), "x"));
  CHECK(material_usage(usage_with({"x"}, ComponentKind::kSnackBar, {"x"}), "x"));
}

TEST_CASE("material usage matches the generator's planted flag") {
  SynthSpec spec;
  spec.app_count = 60;
  spec.render = false;
  const SynthCorpus c = generate(spec);
  UsageMap u;
  for (const auto& app : c.apps) {
    AppComponentUsage a{app.package_id, {}};
    for (ComponentKind k : kAllKinds) {
      const bool on = c.uses(app.package_id, k);
      a.kinds[k] = {on, on, on};
    }
    u[app.package_id] = a;
  }
  for (const auto& app : c.apps) {
    bool any = false;
    for (const auto& row : c.truth)
      if (row.package_id == app.package_id && row.uses) any = true;
    CHECK(material_usage(u, app.package_id) == any);
  }
}

TEST_CASE("bucket curve: sizes, order, constant predicate") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = 100 - i;
  auto c = bucket_curve(samples(v), Metric::kAvgRating, 100, [](const std::string& id) { return id.size() % 2 == 0; });
  for (int n : c.app_count) CHECK(n == 1);
  for (double f : c.fraction) CHECK((f == 0.0 || f == 1.0));
  CHECK(c.order.front() == "app99");

  c = bucket_curve(samples(std::vector<double>(23, 1.0)), Metric::kAvgRating, 5, [](const std::string&) { return true; });
  CHECK(c.app_count == std::vector<int>{5, 5, 5, 4, 4});
  for (double f : c.fraction) CHECK(f == 1.0);
  // ties sort by package id
  CHECK(c.order[0] == "app0");
  CHECK(c.order[1] == "app1");
  CHECK(c.order[2] == "app10");

  CHECK_THROWS_AS(bucket_curve(samples({1, 2}), Metric::kAvgRating, 3, [](const std::string&) { return true; }), DataError);
}

TEST_CASE("bucket curve property: sizes differ by at most one and concatenate to the sorted list") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 5);
  for (int i = 0; i < 100; ++i) {
    const int n = 10 + i * 7, k = 1 + i % 10;
    std::vector<double> v(n);
    for (double& x : v) x = std::round(u(rng) * 10) / 10;
    const auto ss = samples(v);
    const auto c = bucket_curve(ss, Metric::kAvgRating, k, [](const std::string&) { return false; });
    CHECK(*std::max_element(c.app_count.begin(), c.app_count.end()) -
              *std::min_element(c.app_count.begin(), c.app_count.end()) <= 1);
    CHECK(std::accumulate(c.app_count.begin(), c.app_count.end(), 0) == n);
    auto sorted = ss;
    std::sort(sorted.begin(), sorted.end(), [](const MetricSample& a, const MetricSample& b) {
      return a.value != b.value ? a.value < b.value : a.package_id < b.package_id;
    });
    for (int j = 0; j < n; ++j) CHECK(c.order[j] == sorted[j].package_id);
  }
}

TEST_CASE("category rates: minimum count and ordering") {
  std::vector<AppRecord> apps{app("a", 4, 10, "Tools"), app("b", 4, 10, "Tools"), app("c", 4, 10, "Tools"),
                              app("d", 4, 10, "Games"), app("e", 4, 10, "Games"), app("f", 4, 10, "Games"),
                              app("g", 4, 10, "Rare")};
  const auto u = usage_with({"a", "b", "c", "d", "e", "f", "g"}, ComponentKind::kTabLayout, {"a", "d", "e", "g"});
  const auto rates = category_rates(apps, ComponentKind::kTabLayout, u, 3);
  REQUIRE(rates.size() == 2);
  CHECK(rates[0].category == "Games");
  CHECK(rates[0].users == 2);
  CHECK(rates[1].category == "Tools");
  CHECK(rates[1].rate == doctest::Approx(1.0 / 3));
}

TEST_CASE("analyze: full run on a small corpus") {
  std::vector<AppRecord> apps;
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i) {
    apps.push_back(app("p" + std::to_string(100 + i), 3.0 + i * 0.05, i % 2 ? 5'000'000 : 1'000, i % 3 ? "A" : "B"));
    ids.push_back(apps.back().package_id);
  }
  std::set<std::string> users;
  for (int i = 20; i < 40; i += 2) users.insert(ids[i]);
  const auto u = usage_with(ids, ComponentKind::kFloatingActionButton, users);
  const auto res = analyze(apps, u, {1e6, 5, 4});
  CHECK(res.analyzable == 40);
  CHECK(res.splits.at(Metric::kAvgRating).high_group.size() == 20);
  CHECK(res.splits.at(Metric::kInstalls).high_group.size() == 20);
  bool seen = false;
  for (const auto& row : res.group_usage)
    if (row.metric == Metric::kAvgRating && row.predicate == "FloatingActionButton") {
      CHECK(row.low_rate == 0.0);
      CHECK(row.high_rate == 0.5);
      REQUIRE(row.high_share);
      CHECK(*row.high_share == 1.0);
      seen = true;
    }
  CHECK(seen);
  CHECK_FALSE(res.curves.empty());
  CHECK_FALSE(res.box_plots.empty());
}

}  // TEST_SUITE
