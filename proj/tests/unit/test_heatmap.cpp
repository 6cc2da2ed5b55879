// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include <doctest.h>

#include <algorithm>
#include <random>

#include "patternscope/error.hpp"
#include "patternscope/heatmap.hpp"
#include "patternscope/synth.hpp"

using namespace patternscope;

TEST_SUITE("heatmap") {

TEST_CASE("one detection sets exactly one cell") {
  Heatmap h(ComponentKind::kFloatingActionButton, 4, 4);
  h.accumulate(IntRect{10, 10, 20, 20}, Extent{100, 100});
  CHECK(h.total() == 1);
  CHECK(h.counts().sum() == 1);
  CHECK(h.counts()(0, 0) == 1);
}

TEST_CASE("center on a cell boundary lands in the higher cell") {
  // Center x = 25 = 1 * (100 / 4) exactly.
  CHECK(cell_of(IntRect{20, 0, 30, 10}, Extent{100, 100}, 4, 4) == Cell{0, 1});
  CHECK(cell_of(IntRect{0, 40, 10, 60}, Extent{100, 100}, 4, 4) == Cell{2, 0});
  // Right edge center clamps into the last cell.
  CHECK(cell_of(IntRect{100, 100, 100, 100}, Extent{100, 100}, 4, 4) == Cell{3, 3});
}

TEST_CASE("normalized: direct division and constant maps") {
  Heatmap h(ComponentKind::kAppBar, 2, 2);
  Grid<std::int64_t> c(2, 2);
  c << 2, 1, 0, 1;
  h.set_counts(c);
  const Grid<double> n = normalized(h);
  CHECK(n(0, 0) == 1.0);
  CHECK(n(0, 1) == 0.5);
  CHECK(n(1, 0) == 0.0);
  CHECK(n(1, 1) == 0.5);

  c.setConstant(7);
  h.set_counts(c);
  CHECK((normalized(h).array() == 1.0).all());

  CHECK_THROWS_AS(normalized(Heatmap(ComponentKind::kAppBar, 2, 2)), DataError);
  CHECK_THROWS_AS(argmax_region(Heatmap(ComponentKind::kAppBar, 2, 2)), DataError);
}

TEST_CASE("normalized fixture matches hand division") {
  Heatmap h(ComponentKind::kSnackBar, 3, 2);
  Grid<std::int64_t> c(2, 3);
  c << 0, 4, 8, 2, 6, 3;
  h.set_counts(c);
  const Grid<double> n = normalized(h);
  const double expect[2][3] = {{0.0, 0.5, 1.0}, {0.25, 0.75, 0.375}};
  for (int r = 0; r < 2; ++r)
    for (int col = 0; col < 3; ++col) CHECK(n(r, col) == expect[r][col]);
}

TEST_CASE("argmax: single mode and tie-break") {
  Heatmap h(ComponentKind::kFloatingActionButton, 8, 8);
  Grid<std::int64_t> c = Grid<std::int64_t>::Zero(8, 8);
  c(3, 5) = 4;
  h.set_counts(c);
  CHECK(argmax_cell(h) == Cell{3, 5});
  const UnitRect r = argmax_region(h);
  CHECK(r.left == doctest::Approx(5.0 / 8));
  CHECK(r.top == doctest::Approx(3.0 / 8));
  CHECK(r.right == doctest::Approx(6.0 / 8));
  CHECK(r.bottom == doctest::Approx(4.0 / 8));

  c(2, 6) = 4;
  c(3, 1) = 4;
  h.set_counts(c);
  CHECK(argmax_cell(h) == Cell{2, 6});
}

TEST_CASE("synthetic FABs put the mode in the bottom-right quadrant") {
  SynthSpec spec;
  spec.app_count = 80;
  spec.render = false;
  spec.decoy_rate = 0;
  spec.hidden_rate = 0;
  const SynthCorpus corpus = generate(spec);
  Heatmap h(ComponentKind::kFloatingActionButton);
  for (const auto& app : corpus.apps)
    for (const auto& s : app.screens)
      for (const auto& d : detect_in_screen(s, default_rules(), app.package_id))
        if (d.kind == ComponentKind::kFloatingActionButton) h.accumulate(d, s);
  REQUIRE(h.total() > 0);
  const Cell c = argmax_cell(h);
  CHECK(c.col >= h.cols() / 2);
  CHECK(c.row >= h.rows() / 2);
}

TEST_CASE("properties: order independence, merge additivity, total conservation") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coord(0, 1439), ycoord(0, 2559), size(1, 300);
  const Extent ext{1440, 2560};
  for (int round = 0; round < 50; ++round) {
    std::vector<IntRect> rects;
    for (int i = 0; i < 40; ++i) {
      const int l = coord(rng), t = ycoord(rng);
      rects.push_back({l, t, std::min(1440, l + size(rng)), std::min(2560, t + size(rng))});
    }
    Heatmap a(ComponentKind::kTabLayout), b(ComponentKind::kTabLayout);
    for (const auto& r : rects) a.accumulate(r, ext);
    auto shuffled = rects;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (const auto& r : shuffled) b.accumulate(r, ext);
    CHECK(a == b);
    CHECK(a.total() == static_cast<std::int64_t>(rects.size()));
    CHECK(a.counts().sum() == a.total());

    Heatmap first(ComponentKind::kTabLayout), second(ComponentKind::kTabLayout);
    for (std::size_t i = 0; i < rects.size(); ++i) (i < 17 ? first : second).accumulate(rects[i], ext);
    first.merge(second);
    CHECK(first == a);

    const Grid<double> n = normalized(a);
    CHECK(n.maxCoeff() == 1.0);
    CHECK(n.minCoeff() >= 0.0);
  }
}

TEST_CASE("merge rejects a different kind or shape") {
  Heatmap a(ComponentKind::kTabLayout, 4, 4);
  CHECK_THROWS(a.merge(Heatmap(ComponentKind::kAppBar, 4, 4)));
  CHECK_THROWS(a.merge(Heatmap(ComponentKind::kTabLayout, 4, 5)));
}

TEST_CASE("grid and size serialization round trip") {
  Heatmap h(ComponentKind::kNavigationDrawer, 5, 7);
  h.accumulate(IntRect{0, 312, 960, 2150}, Extent{1440, 2560});
  h.accumulate(IntRect{0, 300, 900, 2000}, Extent{1440, 2560});
  Heatmap back = parse_grid(serialize_grid(h));
  parse_sizes(back, serialize_sizes(h));
  CHECK(back == h);
  CHECK(h.median_width() == doctest::Approx((960.0 + 900.0) / 2 / 1440));
  const auto img = render_heatmap(h, 4);
  CHECK(img.cols() == 20);
  CHECK(img.rows() == 28);
}

}  // TEST_SUITE
