// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include <doctest.h>

#include "patternscope/detector.hpp"
#include "patternscope/error.hpp"
#include "patternscope/synth.hpp"
#include "support.hpp"

using namespace patternscope;

namespace {

const KeywordRule kFab{ComponentKind::kFloatingActionButton, {"float"}};

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("match_node: class name, ancestors, none") {
  auto m = match_node(test::node("com.x.MyFloatButton", {0, 0, 1, 1}), kFab);
  REQUIRE(m);
  CHECK(m->via == MatchSource::kClassName);
  CHECK(m->keyword == "float");

  m = match_node(test::node("android.widget.ImageButton", {0, 0, 1, 1}, true, {},
                            {"android.support.design.widget.FloatingActionButton", "android.view.View"}),
                 kFab);
  REQUIRE(m);
  CHECK(m->via == MatchSource::kAncestor);

  CHECK_FALSE(match_node(test::node("android.widget.TextView", {0, 0, 1, 1}), kFab));
}

TEST_CASE("class name beats ancestor") {
  const auto m = match_node(test::node("x.FloatBox", {0, 0, 1, 1}, true, {}, {"y.FloatParent"}), kFab);
  REQUIRE(m);
  CHECK(m->via == MatchSource::kClassName);
}

TEST_CASE("captured invisible FAB element yields no detection") {
  const Screen s = parse_view_hierarchy(test::slurp(test::data_dir() / "fab_element.json"), "fab_element");
  CHECK(detect_in_screen(s, default_rules(), "se.perigee.android.seven").empty());
}

TEST_CASE("visible grandchild: one detection, path length 2") {
  const Screen s = test::screen(
      "s", test::node("Decor", {0, 0, 100, 100}, true,
                      {test::node("Frame", {0, 0, 100, 100}, true, {test::node("x.FloatBtn", {80, 80, 95, 95})})}));
  const auto d = detect_in_screen(s, default_rules(), "p");
  REQUIRE(d.size() == 1);
  CHECK(d[0].kind == ComponentKind::kFloatingActionButton);
  CHECK(d[0].node_path == NodePath{0, 0});
  CHECK(d[0].bounds == IntRect{80, 80, 95, 95});
  CHECK(d[0].package_id == "p");
}

TEST_CASE("two kinds on one screen give two detections in traversal order") {
  const Screen s = test::screen(
      "s", test::node("Decor", {0, 0, 100, 100}, true,
                      {test::node("x.FloatActionBtn", {80, 80, 95, 95}), test::node("y.SnackbarLayout", {0, 85, 70, 95})}));
  const auto d = detect_in_screen(s, default_rules(), "p");
  REQUIRE(d.size() == 2);
  CHECK(d[0].kind == ComponentKind::kFloatingActionButton);
  CHECK(d[1].kind == ComponentKind::kSnackBar);
}

TEST_CASE("invisible node is skipped but its subtree is searched") {
  const Screen s = test::screen(
      "s", test::node("Decor", {0, 0, 100, 100}, true,
                      {test::node("x.FloatHost", {0, 0, 50, 50}, false, {test::node("x.FloatInner", {0, 0, 10, 10})})}));
  const auto d = detect_in_screen(s, default_rules(), "p");
  REQUIRE(d.size() == 1);
  CHECK(d[0].node_path == NodePath{0, 0});
}

TEST_CASE("after a match the subtree is pruned for that rule only") {
  const Screen s = test::screen(
      "s", test::node("Decor", {0, 0, 100, 100}, true,
                      {test::node("x.FloatOuter", {0, 0, 50, 50}, true,
                                  {test::node("x.FloatInner", {0, 0, 10, 10}), test::node("x.Toolbar", {0, 0, 50, 5})})}));
  const auto d = detect_in_screen(s, default_rules(), "p");
  REQUIRE(d.size() == 2);
  CHECK(d[0].kind == ComponentKind::kFloatingActionButton);
  CHECK(d[0].node_path == NodePath{0});
  CHECK(d[1].kind == ComponentKind::kAppBar);
  CHECK(d[1].node_path == NodePath{0, 1});
}

TEST_CASE("detect_in_app: zero screens and union over screens") {
  AppRecord empty{"p", {}, std::nullopt, ExclusionReason::kNone};
  for (const auto& [k, list] : detect_in_app(empty, default_rules())) CHECK(list.empty());

  AppRecord app{"p", {}, std::nullopt, ExclusionReason::kNone};
  for (int i = 0; i < 3; ++i) {
    std::vector<ViewNode> kids;
    if (i < 2) kids.push_back(test::node("x.FloatBtn", {80, 80, 95, 95}));
    app.screens.push_back(test::screen("s" + std::to_string(i), test::node("Decor", {0, 0, 100, 100}, true, kids)));
  }
  const auto d = detect_in_app(app, default_rules());
  CHECK(d.at(ComponentKind::kFloatingActionButton).size() == 2);
}

TEST_CASE("registry parse: format round trip and errors") {
  const auto rules = parse_rules("# comment\nFloatingActionButton: float, fab\nSnackBar: snack\n");
  REQUIRE(rules.size() == 2);
  CHECK(rules[0].keywords == std::vector<std::string>{"float", "fab"});
  const auto back = parse_rules(format_rules(default_rules()));
  REQUIRE(back.size() == 6);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].kind == default_rules()[i].kind);
    CHECK(back[i].keywords == default_rules()[i].keywords);
  }
  CHECK_THROWS_AS(parse_rules("Widget: w\n"), ConfigError);
  CHECK_THROWS_AS(parse_rules("SnackBar: a\nSnackBar: b\n"), ConfigError);
  CHECK_THROWS_AS(parse_rules("SnackBar:\n"), ConfigError);
  CHECK(load_rules(test::data_dir() / ".." / ".." / "data" / "keywords.conf").size() == 6);
}

TEST_CASE("synthetic corpus: provenance, monotonicity and candidate counts") {
  SynthSpec spec;
  spec.app_count = 60;
  spec.render = false;
  const SynthCorpus corpus = generate(spec);
  const auto rules = default_rules();
  auto wider = rules;
  wider[0].keywords.push_back("header");

  std::map<ComponentKind, std::size_t> expected, found;
  for (const auto& n : corpus.nodes) ++expected[n.kind];
  std::set<std::tuple<std::string, std::string, std::string>> truth_paths;
  for (const auto& n : corpus.nodes) truth_paths.insert({n.package_id, n.screen_id, format_node_path(n.node_path)});

  for (const auto& app : corpus.apps)
    for (const auto& s : app.screens) {
      const auto d = detect_in_screen(s, rules, app.package_id);
      for (const auto& det : d) {
        ++found[det.kind];
        const ViewNode* n = resolve_path(s.root, det.node_path);
        REQUIRE(n != nullptr);
        const auto& rule = *std::find_if(rules.begin(), rules.end(), [&](const KeywordRule& r) { return r.kind == det.kind; });
        const auto m = match_node(*n, rule);
        REQUIRE(m);
        CHECK(m->via == det.matched_via);
        CHECK(m->keyword == det.matched_keyword);
        CHECK(truth_paths.count({app.package_id, s.screen_id, format_node_path(det.node_path)}) == 1);
      }
      CHECK(detect_in_screen(s, rules, app.package_id) == d);
      const auto more = detect_in_screen(s, wider, app.package_id);
      for (const auto& det : d)
        CHECK(std::any_of(more.begin(), more.end(), [&](const Detection& m) {
          return m.kind == det.kind && m.node_path == det.node_path;
        }));
    }
  for (ComponentKind k : kAllKinds) CHECK(found[k] == expected[k]);
}

}  // TEST_SUITE
