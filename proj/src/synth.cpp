// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "patternscope/csv.hpp"
#include "patternscope/error.hpp"

namespace patternscope {

namespace {

constexpr Rgb kBackground{245, 245, 245};
constexpr Rgb kCard{255, 255, 255};
constexpr Rgb kCardText{158, 158, 158};
constexpr Rgb kDecoyText{66, 66, 66};
constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kKeyboard{207, 216, 220};
constexpr std::array<Rgb, 4> kImagePalette{{{188, 170, 164}, {176, 190, 197}, {200, 200, 180}, {161, 136, 127}}};

const std::vector<std::string> kViewAncestors{"android.view.View", "java.lang.Object"};

std::vector<std::string> chain(std::initializer_list<std::string> head) {
  std::vector<std::string> out(head);
  out.insert(out.end(), kViewAncestors.begin(), kViewAncestors.end());
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view key) : rng_(splitmix64(seed ^ fnv1a(key))) {}
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool bernoulli(double p) { return uniform() < p; }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng_); }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(uniform_int(0, static_cast<int>(v.size()) - 1))]; }

 private:
  std::mt19937_64 rng_;
};

ViewNode node(std::string cls, std::vector<std::string> ancestors, IntRect bounds, bool visible = true,
              std::vector<ViewNode> children = {}) {
  ViewNode n;
  n.class_name = std::move(cls);
  n.ancestors = std::move(ancestors);
  n.bounds = bounds;
  n.visible_to_user = visible;
  n.children = std::move(children);
  n.extras["enabled"] = "true";
  return n;
}

struct Variant {
  std::string cls;
  std::vector<std::string> ancestors;
};

std::vector<Variant> variants(ComponentKind kind, const std::string& pkg) {
  switch (kind) {
    case ComponentKind::kAppBar:
      return {{"android.support.design.widget.AppBarLayout", chain({"android.widget.LinearLayout", "android.view.ViewGroup"})},
              {"android.support.v7.widget.Toolbar", chain({"android.view.ViewGroup"})},
              {pkg + ".ui.HeaderView", chain({"android.support.v7.widget.Toolbar", "android.view.ViewGroup"})}};
    case ComponentKind::kFloatingActionButton:
      return {{"android.support.design.widget.FloatingActionButton",
               chain({"android.support.design.widget.VisibilityAwareImageButton", "android.widget.ImageButton",
                      "android.widget.ImageView"})},
              {pkg + ".widget.FloatButton", chain({"android.widget.ImageButton", "android.widget.ImageView"})},
              {pkg + ".widget.RoundActionButton",
               chain({"android.support.design.widget.FloatingActionButton",
                      "android.support.design.widget.VisibilityAwareImageButton", "android.widget.ImageButton",
                      "android.widget.ImageView"})}};
    case ComponentKind::kBottomNavigation:
      return {{"android.support.design.widget.BottomNavigationView", chain({"android.widget.FrameLayout", "android.view.ViewGroup"})},
              {"com.aurelhubert.ahbottomnavigation.AHBottomNavigation", chain({"android.widget.FrameLayout", "android.view.ViewGroup"})},
              {pkg + ".ui.FooterMenu", chain({"android.support.design.widget.BottomNavigationView", "android.widget.FrameLayout",
                                              "android.view.ViewGroup"})}};
    case ComponentKind::kNavigationDrawer:
      return {{pkg + ".ui.NavDrawerPanel", chain({"android.widget.FrameLayout", "android.view.ViewGroup"})},
              {"com.mikepenz.materialdrawer.view.ScrimInsetsRelativeLayout", chain({"android.widget.RelativeLayout", "android.view.ViewGroup"})},
              {pkg + ".ui.SideMenu", chain({"android.support.v4.widget.DrawerLayout", "android.view.ViewGroup"})}};
    case ComponentKind::kSnackBar:
      return {{"android.support.design.widget.Snackbar$SnackbarLayout", chain({"android.widget.LinearLayout", "android.view.ViewGroup"})},
              {pkg + ".ui.SnackbarView", chain({"android.widget.LinearLayout", "android.view.ViewGroup"})},
              {pkg + ".ui.ToastStrip", chain({"android.support.design.widget.Snackbar$SnackbarLayout", "android.widget.LinearLayout",
                                              "android.view.ViewGroup"})}};
    case ComponentKind::kTabLayout:
      return {{"android.support.design.widget.TabLayout", chain({"android.widget.HorizontalScrollView", "android.widget.FrameLayout"})},
              {pkg + ".ui.SlidingTabLayout", chain({"android.widget.HorizontalScrollView", "android.widget.FrameLayout"})},
              {pkg + ".ui.PagerStrip", chain({"android.support.design.widget.TabLayout", "android.widget.HorizontalScrollView"})}};
  }
  return {};
}

std::string decoy_class(ComponentKind kind, const std::string& pkg, Stream& s) {
  static const std::map<ComponentKind, std::vector<std::string>> names{
      {ComponentKind::kAppBar, {"ActionBarHintText", "ToolbarCaption"}},
      {ComponentKind::kFloatingActionButton, {"FloatingTextView", "FloatLabelEditText"}},
      {ComponentKind::kBottomNavigation, {"BottomNavigationLabel", "Bottom_navCaption"}},
      {ComponentKind::kNavigationDrawer, {"DrawerHintText", "DrawerItemLabel"}},
      {ComponentKind::kSnackBar, {"SnackMessageText", "SnackCounterView"}},
      {ComponentKind::kTabLayout, {"TabBarCaption", "TabLayoutTitle"}},
  };
  return pkg + ".text." + s.pick(names.at(kind));
}

IntRect component_bounds(ComponentKind kind, Stream& s) {
  switch (kind) {
    case ComponentKind::kAppBar: return {0, 0, 1440, 168};
    case ComponentKind::kTabLayout: return {0, 168, 1440, 312};
    case ComponentKind::kBottomNavigation: return {0, 2392, 1440, 2560};
    case ComponentKind::kNavigationDrawer: return {0, 312, 960, 2150};
    case ComponentKind::kSnackBar: return {32, 2176, 1120, 2360};
    case ComponentKind::kFloatingActionButton: {
      const int d = s.uniform_int(168, 224);
      const int cx = 1286 + s.uniform_int(-40, 40);
      const int cy = 2238 + s.uniform_int(-40, 40);
      return {cx - d / 2, cy - d / 2, cx - d / 2 + d, cy - d / 2 + d};
    }
  }
  return {};
}

std::vector<ViewNode> component_children(ComponentKind kind, const IntRect& b) {
  switch (kind) {
    case ComponentKind::kAppBar:
      return {node("android.widget.TextView", chain({}), {b.left + 200, b.top + 62, b.left + 760, b.top + 106})};
    case ComponentKind::kTabLayout: {
      std::vector<ViewNode> tabs;
      for (int i = 0; i < 3; ++i)
        tabs.push_back(node("android.widget.TextView", chain({}), {b.left + 480 * i, b.top, b.left + 480 * (i + 1), b.bottom}));
      return tabs;
    }
    case ComponentKind::kBottomNavigation: {
      std::vector<ViewNode> items;
      for (int i = 0; i < 4; ++i)
        items.push_back(node("android.widget.ImageView", chain({}), {360 * i, b.top, 360 * (i + 1), b.bottom}));
      return items;
    }
    default: return {};
  }
}

Rgb glyph(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kAppBar: return {33, 150, 243};
    case ComponentKind::kFloatingActionButton: return {255, 87, 34};
    case ComponentKind::kBottomNavigation: return {0, 150, 136};
    case ComponentKind::kNavigationDrawer: return {63, 81, 181};
    case ComponentKind::kSnackBar: return {50, 50, 50};
    case ComponentKind::kTabLayout: return {156, 39, 176};
  }
  return {0, 0, 0};
}

class Canvas {
 public:
  Canvas(Extent pixels, Extent virt)
      : img_(pixels.width, pixels.height),
        sx_(static_cast<double>(pixels.width) / virt.width),
        sy_(static_cast<double>(pixels.height) / virt.height) {
    img_.fill(kBackground[0], kBackground[1], kBackground[2]);
  }

  IntRect px(const IntRect& v) const {
    return {static_cast<int>(std::lround(v.left * sx_)), static_cast<int>(std::lround(v.top * sy_)),
            static_cast<int>(std::lround(v.right * sx_)), static_cast<int>(std::lround(v.bottom * sy_))};
  }
  void rect(const IntRect& v, const Rgb& c) { fill_rect(img_, px(v), c); }
  void disc(const IntRect& v, const Rgb& c) { fill_disc(img_, px(v), c); }
  Image8 take() { return std::move(img_); }

 private:
  Image8 img_;
  double sx_, sy_;
};

void draw_component(Canvas& cv, ComponentKind kind, const IntRect& b) {
  const Rgb col = glyph(kind);
  switch (kind) {
    case ComponentKind::kAppBar:
      cv.rect(b, col);
      cv.rect({b.left + 200, b.top + 62, b.left + 760, b.top + 106}, kWhite);
      cv.rect({b.right - 120, b.top + 56, b.right - 60, b.top + 112}, kWhite);
      break;
    case ComponentKind::kTabLayout:
      cv.rect(b, col);
      for (int i = 0; i < 3; ++i) cv.rect({b.left + 480 * i + 140, b.top + 52, b.left + 480 * i + 340, b.top + 88}, {225, 190, 231});
      cv.rect({b.left, b.bottom - 16, b.left + 480, b.bottom}, kWhite);
      break;
    case ComponentKind::kFloatingActionButton: {
      cv.disc(b, col);
      const int cx = (b.left + b.right) / 2, cy = (b.top + b.bottom) / 2;
      const int arm = b.width() / 4, half = std::max(4, b.width() / 24);
      cv.rect({cx - arm, cy - half, cx + arm, cy + half}, kWhite);
      cv.rect({cx - half, cy - arm, cx + half, cy + arm}, kWhite);
      break;
    }
    case ComponentKind::kBottomNavigation:
      cv.rect(b, col);
      for (int i = 0; i < 4; ++i) {
        const int cx = 180 + 360 * i, cy = (b.top + b.bottom) / 2;
        cv.rect({cx - 32, cy - 32, cx + 32, cy + 32}, kWhite);
      }
      break;
    case ComponentKind::kNavigationDrawer:
      cv.rect(b, col);
      cv.rect({b.left, b.top, b.right, b.top + b.height() / 4}, {48, 63, 159});
      for (int y = b.top + b.height() / 4 + 80; y + 40 < b.bottom; y += 140)
        cv.rect({b.left + 64, y, b.right - 200, y + 40}, {197, 202, 233});
      break;
    case ComponentKind::kSnackBar: {
      cv.rect(b, col);
      const int cy = (b.top + b.bottom) / 2;
      cv.rect({b.left + 48, cy - 22, b.left + 600, cy + 22}, {200, 200, 200});
      cv.rect({b.right - 260, cy - 24, b.right - 60, cy + 24}, {255, 193, 7});
      break;
    }
  }
}

void draw_keyboard(Canvas& cv, const IntRect& b) {
  cv.rect(b, kKeyboard);
  for (int y = b.top + 20; y + 60 <= b.bottom; y += 100)
    for (int x = b.left + 20; x + 60 <= b.right; x += 100) cv.rect({x, y, x + 60, y + 60}, kWhite);
}

void draw_text_lines(Canvas& cv, const IntRect& b, const Rgb& col) {
  const int lines = b.height() >= 100 ? 2 : 1;
  const int lh = b.height() / (2 * lines + 1);
  for (int i = 0; i < lines; ++i) {
    const int top = b.top + lh * (2 * i + 1);
    const int right = i == lines - 1 && lines > 1 ? b.left + b.width() * 2 / 3 : b.right;
    cv.rect({b.left, top, right, top + lh}, col);
  }
}

bool overlaps(const IntRect& a, const IntRect& b) { return !a.intersect(b).empty(); }

struct AppPlan {
  std::string package_id;
  double rating = 0;
  double install_noise = 0;
  std::string category;
  bool excluded = false;
  bool metadata_missing = false;
};

constexpr std::array<std::uint64_t, 17> kInstallBuckets{
    100, 500, 1000, 5000, 10000, 50000, 100000, 500000, 1000000, 5000000, 10000000, 50000000,
    100000000, 500000000, 1000000000, 5000000000ULL, 10000000000ULL};

std::uint64_t snap_installs(double value) {
  std::uint64_t out = kInstallBuckets.front();
  for (std::uint64_t b : kInstallBuckets)
    if (static_cast<double>(b) <= value) out = b;
  return out;
}

void check_probability(double p, const std::string& name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("synth settings: " + name + " must be in [0,1]");
}

}  // namespace

std::map<ComponentKind, Adoption> SynthSpec::default_adoption() {
  return {
      {ComponentKind::kAppBar, {0.30, 0.70}},         {ComponentKind::kFloatingActionButton, {0.05, 0.20}},
      {ComponentKind::kBottomNavigation, {0.02, 0.08}}, {ComponentKind::kNavigationDrawer, {0.03, 0.10}},
      {ComponentKind::kSnackBar, {0.02, 0.08}},       {ComponentKind::kTabLayout, {0.05, 0.15}},
  };
}

std::vector<std::string> SynthSpec::default_categories() {
  return {"Communication", "Education",     "Entertainment", "Finance",  "Food & Drink",
          "Health & Fitness", "Lifestyle",  "Music & Audio", "Parenting", "Shopping",
          "Social",        "Travel & Local"};
}

void SynthSpec::validate() const {
  if (app_count <= 0) throw ConfigError("synth settings: app_count must be positive");
  if (screens_min < 1 || screens_max < screens_min) throw ConfigError("synth settings: bad screens range");
  check_probability(presence_rate, "presence_rate");
  check_probability(decoy_rate, "decoy_rate");
  check_probability(occlusion_rate, "occlusion_rate");
  check_probability(hidden_rate, "hidden_rate");
  check_probability(excluded_rate, "excluded_rate");
  check_probability(metadata_missing_rate, "metadata_missing_rate");
  bool any_adoption = false;
  for (const auto& [kind, a] : adoption) {
    check_probability(a.low, "adoption." + std::string(to_string(kind)));
    check_probability(a.high, "adoption." + std::string(to_string(kind)));
    any_adoption = any_adoption || a.low > 0 || a.high > 0;
  }
  if (occlusion_rate > 0 && !any_adoption)
    throw ConfigError("synth settings: occlusion_rate > 0 but no component can be adopted");
  if (categories.empty()) throw ConfigError("synth settings: no categories");
  if (!virtual_extent.positive() || screenshot_sizes.empty()) throw ConfigError("synth settings: bad extents");
  for (const auto& e : screenshot_sizes)
    if (!e.positive()) throw ConfigError("synth settings: bad screenshot size");
  if (!(rating_sd >= 0)) throw ConfigError("synth settings: rating_sd must be nonnegative");
}

SynthSpec synth_spec_from(const KeyValues& kv, SynthSpec base) {
  static const std::set<std::string> known{
      "app_count", "screens_min", "screens_max", "presence_rate", "decoy_rate", "occlusion_rate",
      "hidden_rate", "excluded_rate", "metadata_missing_rate", "rating_mean", "rating_sd",
      "install_coupling", "seed", "render", "screenshot_extension", "jpeg_quality", "categories"};
  for (const auto& [key, value] : kv.values())
    if (!known.count(key) && !(key.rfind("adoption.", 0) == 0 && kind_from_string(key.substr(9))))
      throw ConfigError(kv.source() + ": unknown key '" + key + "'");
  base.app_count = static_cast<int>(kv.get_int("app_count", base.app_count));
  base.screens_min = static_cast<int>(kv.get_int("screens_min", base.screens_min));
  base.screens_max = static_cast<int>(kv.get_int("screens_max", base.screens_max));
  base.presence_rate = kv.get_double("presence_rate", base.presence_rate);
  base.decoy_rate = kv.get_double("decoy_rate", base.decoy_rate);
  base.occlusion_rate = kv.get_double("occlusion_rate", base.occlusion_rate);
  base.hidden_rate = kv.get_double("hidden_rate", base.hidden_rate);
  base.excluded_rate = kv.get_double("excluded_rate", base.excluded_rate);
  base.metadata_missing_rate = kv.get_double("metadata_missing_rate", base.metadata_missing_rate);
  base.rating_mean = kv.get_double("rating_mean", base.rating_mean);
  base.rating_sd = kv.get_double("rating_sd", base.rating_sd);
  base.install_coupling = kv.get_double("install_coupling", base.install_coupling);
  base.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(base.seed)));
  base.render = kv.get_bool("render", base.render);
  base.screenshot_extension = kv.get_or("screenshot_extension", base.screenshot_extension);
  base.jpeg_quality = static_cast<int>(kv.get_int("jpeg_quality", base.jpeg_quality));
  for (ComponentKind k : kAllKinds) {
    const std::string key = "adoption." + std::string(to_string(k));
    if (auto v = kv.get(key)) {
      std::istringstream in(*v);
      Adoption a;
      if (!(in >> a.low)) throw ConfigError(key + ": expected 'low [high]'");
      if (!(in >> a.high)) a.high = a.low;
      base.adoption[k] = a;
    }
  }
  if (auto v = kv.get("categories")) {
    base.categories.clear();
    std::istringstream in(*v);
    std::string c;
    while (std::getline(in, c, ';')) {
      const auto b = c.find_first_not_of(' '), e = c.find_last_not_of(' ');
      if (b != std::string::npos) base.categories.push_back(c.substr(b, e - b + 1));
    }
  }
  base.validate();
  return base;
}

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::kPlanted: return "planted";
    case NodeRole::kOccluded: return "occluded";
    case NodeRole::kDecoy: return "decoy";
  }
  return "unknown";
}

Rgb glyph_color(ComponentKind kind) { return glyph(kind); }

std::string format_installs(std::uint64_t installs) {
  std::string digits = std::to_string(installs);
  std::string out;
  const int n = static_cast<int>(digits.size());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[static_cast<std::size_t>(i)]);
  }
  return out + "+";
}

bool SynthCorpus::uses(const std::string& package_id, ComponentKind kind) const {
  for (const auto& t : truth)
    if (t.package_id == package_id && t.kind == kind) return t.uses;
  return false;
}

ScreenshotLoader SynthCorpus::loader() const {
  return [this](const AppRecord& app, const Screen& screen) -> Image8 {
    const auto it = screenshots.find({app.package_id, screen.screen_id});
    if (it == screenshots.end())
      throw IoError("no in-memory screenshot for " + app.package_id + "/" + screen.screen_id);
    return it->second;
  };
}

CropTruth SynthCorpus::crop_truth() const {
  CropTruth truth;
  for (const auto& n : nodes)
    truth[{n.package_id, n.screen_id, format_node_path(n.node_path)}] = n.role == NodeRole::kPlanted;
  return truth;
}

namespace {

using ScreenshotSink = std::function<void(const std::string&, const std::string&, Image8&&)>;

SynthCorpus generate_impl(const SynthSpec& spec, const ScreenshotSink& sink) {
  spec.validate();
  const int n_apps = spec.app_count;
  std::vector<AppPlan> plans;
  std::vector<Stream> streams;
  plans.reserve(static_cast<std::size_t>(n_apps));
  streams.reserve(static_cast<std::size_t>(n_apps));
  for (int i = 0; i < n_apps; ++i) {
    AppPlan p;
    p.package_id = fmt::format("com.synth.app{:05d}", i);
    Stream& s = streams.emplace_back(spec.seed, p.package_id);
    p.rating = std::clamp(spec.rating_sd > 0 ? s.normal(spec.rating_mean, spec.rating_sd) : spec.rating_mean, 1.0, 5.0);
    p.rating = std::round(p.rating * 100.0) / 100.0;
    p.install_noise = s.normal(0.0, 1.0);
    p.category = s.pick(spec.categories);
    p.excluded = s.bernoulli(spec.excluded_rate);
    p.metadata_missing = s.bernoulli(spec.metadata_missing_rate);
    plans.push_back(std::move(p));
  }

  std::vector<int> order(static_cast<std::size_t>(n_apps));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = plans[static_cast<std::size_t>(a)];
    const auto& pb = plans[static_cast<std::size_t>(b)];
    return pa.rating != pb.rating ? pa.rating < pb.rating : pa.package_id < pb.package_id;
  });

  SynthCorpus out;
  std::vector<double> percentile(static_cast<std::size_t>(n_apps), 0.5);
  for (int r = 0; r < n_apps; ++r)
    percentile[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = n_apps > 1 ? static_cast<double>(r) / (n_apps - 1) : 0.5;

  for (int i = 0; i < n_apps; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const AppPlan& plan = plans[idx];
    Stream& s = streams[idx];
    const double pct = percentile[idx];
    const std::string& pkg = plan.package_id;
    out.percentile[pkg] = pct;

    const double log_installs = 6.0 + spec.install_coupling * 3.0 * (pct - 0.5) + plan.install_noise;
    const AppMetadata meta{plan.rating, snap_installs(std::pow(10.0, log_installs)), plan.category};

    AppRecord app;
    app.package_id = pkg;
    if (!plan.metadata_missing) {
      app.metadata = meta;
      out.metadata.apps.emplace(pkg, meta);
    }
    if (plan.excluded) {
      app.exclusion = ExclusionReason::kExclusionList;
      out.exclusions.insert(pkg);
    }

    const int n_screens = s.uniform_int(spec.screens_min, spec.screens_max);
    const Extent shot_size = s.pick(spec.screenshot_sizes);
    std::map<ComponentKind, std::vector<bool>> presence;
    for (ComponentKind k : kAllKinds) {
      const auto it = spec.adoption.find(k);
      const double p = it == spec.adoption.end() ? 0.0 : it->second.at(pct);
      if (!s.bernoulli(p)) continue;
      std::vector<bool> on(static_cast<std::size_t>(n_screens));
      bool any = false;
      for (auto&& v : on) any |= (v = s.bernoulli(spec.presence_rate));
      if (!any) on[static_cast<std::size_t>(s.uniform_int(0, n_screens - 1))] = true;
      presence[k] = std::move(on);
    }

    std::map<ComponentKind, GroundTruthRow> truth;
    for (ComponentKind k : kAllKinds) truth[k] = {pkg, k, false, 0, 0, 0};

    for (int sc = 0; sc < n_screens; ++sc) {
      Screen screen;
      screen.screen_id = fmt::format("screen{}", sc);
      screen.virtual_extent = spec.virtual_extent;
      screen.screenshot.pixels = shot_size;
      const IntRect full{0, 0, spec.virtual_extent.width, spec.virtual_extent.height};

      struct Planted {
        ComponentKind kind;
        IntRect bounds;
        bool occluded;
        const Variant* variant;
      };
      std::vector<Planted> planted;
      std::map<ComponentKind, std::vector<Variant>> kind_variants;
      for (const auto& [k, on] : presence) {
        if (!on[static_cast<std::size_t>(sc)]) continue;
        kind_variants[k] = variants(k, pkg);
      }
      for (auto& [k, vars] : kind_variants) {
        const IntRect b = component_bounds(k, s);
        const bool occluded = s.bernoulli(spec.occlusion_rate);
        planted.push_back({k, b, occluded, &s.pick(vars)});
      }

      std::vector<ViewNode> content;
      std::vector<std::pair<IntRect, int>> cards;  // bounds, image palette index or -1
      const int n_cards = s.uniform_int(2, 5);
      for (int c = 0; c < n_cards; ++c) {
        const int top = s.uniform_int(330, 2000);
        const int h = s.uniform_int(240, 520);
        const IntRect cb{32, top, 1408, std::min(top + h, 2380)};
        const bool has_image = s.bernoulli(0.6);
        const int palette = has_image ? s.uniform_int(0, static_cast<int>(kImagePalette.size()) - 1) : -1;
        std::vector<ViewNode> kids{node("android.widget.TextView", chain({}), {cb.left + 32, cb.top + 32, cb.right - 400, cb.top + 80})};
        if (has_image) kids.push_back(node("android.widget.ImageView", chain({}), {cb.right - 336, cb.top + 32, cb.right - 32, cb.bottom - 32}));
        content.push_back(node("android.support.v7.widget.CardView", chain({"android.widget.FrameLayout", "android.view.ViewGroup"}), cb, true, std::move(kids)));
        cards.push_back({cb, palette});
      }

      struct Decoy {
        ComponentKind kind;
        IntRect bounds;
      };
      std::vector<Decoy> decoys;
      for (ComponentKind k : kAllKinds) {
        if (!s.bernoulli(spec.decoy_rate)) continue;
        for (int attempt = 0; attempt < 50; ++attempt) {
          const int w = s.uniform_int(240, 720);
          const int h = s.uniform_int(72, 128);
          const int left = s.uniform_int(40, 1400 - w);
          const int top = s.uniform_int(400, 2000 - h);
          const IntRect b{left, top, left + w, top + h};
          const IntRect guard{b.left - 48, b.top - 48, b.right + 48, b.bottom + 48};
          bool clear = true;
          for (const auto& p : planted) clear = clear && !overlaps(guard, p.bounds);
          for (const auto& d : decoys) clear = clear && !overlaps(guard, d.bounds);
          if (!clear) continue;
          decoys.push_back({k, b});
          break;
        }
      }

      const std::size_t decoy_base = content.size();
      for (const auto& d : decoys) {
        ViewNode dn = node(decoy_class(d.kind, pkg, s), chain({"android.widget.TextView"}), d.bounds);
        content.push_back(std::move(dn));
      }
      const std::size_t planted_base = content.size();
      for (const auto& p : planted) {
        ViewNode pn = node(p.variant->cls, p.variant->ancestors, p.bounds, true, component_children(p.kind, p.bounds));
        pn.resource_id = pkg + ":id/" + std::string(to_string(p.kind));
        content.push_back(std::move(pn));
      }
      if (s.bernoulli(spec.hidden_rate)) {
        const ComponentKind k = kAllKinds[static_cast<std::size_t>(s.uniform_int(0, 5))];
        const Variant v = variants(k, pkg).front();
        ViewNode hn = node(v.cls, v.ancestors, component_bounds(k, s), false);
        hn.extras["visibility"] = "\"gone\"";
        content.push_back(std::move(hn));
      }

      const NodePath content_path{0, 0};
      auto path_of = [&](std::size_t i) {
        NodePath p = content_path;
        p.push_back(static_cast<int>(i));
        return p;
      };
      for (std::size_t d = 0; d < decoys.size(); ++d) {
        out.nodes.push_back({pkg, screen.screen_id, path_of(decoy_base + d), decoys[d].kind, NodeRole::kDecoy, decoys[d].bounds});
        ++truth[decoys[d].kind].decoy_count;
      }
      for (std::size_t p = 0; p < planted.size(); ++p) {
        const auto& pl = planted[p];
        out.nodes.push_back({pkg, screen.screen_id, path_of(planted_base + p), pl.kind,
                             pl.occluded ? NodeRole::kOccluded : NodeRole::kPlanted, pl.bounds});
        auto& t = truth[pl.kind];
        t.uses = true;
        ++(pl.occluded ? t.occluded_count : t.planted_count);
      }

      ViewNode frame = node("android.widget.FrameLayout", chain({"android.view.ViewGroup"}), full, true, std::move(content));
      frame.resource_id = "android:id/content";
      ViewNode linear = node("android.widget.LinearLayout", chain({"android.view.ViewGroup"}), full, true, {});
      linear.children.push_back(std::move(frame));
      screen.root = node("com.android.internal.policy.PhoneWindow$DecorView",
                         chain({"android.widget.FrameLayout", "android.view.ViewGroup"}), full, true, {});
      screen.root.children.push_back(std::move(linear));

      if (spec.render) {
        Canvas cv(shot_size, spec.virtual_extent);
        for (const auto& [cb, palette] : cards) {
          cv.rect(cb, kCard);
          cv.rect({cb.left + 32, cb.top + 32, cb.right - 400, cb.top + 80}, kCardText);
          cv.rect({cb.left + 32, cb.top + 112, cb.right - 520, cb.top + 144}, kCardText);
          if (palette >= 0) cv.rect({cb.right - 336, cb.top + 32, cb.right - 32, cb.bottom - 32}, kImagePalette[static_cast<std::size_t>(palette)]);
        }
        for (const auto& d : decoys) draw_text_lines(cv, d.bounds, kDecoyText);
        for (const auto& p : planted) draw_component(cv, p.kind, p.bounds);
        for (const auto& p : planted)
          if (p.occluded) draw_keyboard(cv, p.bounds);
        if (sink) sink(pkg, screen.screen_id, cv.take());
        else out.screenshots.emplace(std::make_pair(pkg, screen.screen_id), cv.take());
      }
      app.screens.push_back(std::move(screen));
    }
    for (ComponentKind k : kAllKinds) out.truth.push_back(truth[k]);
    out.apps.push_back(std::move(app));
  }
  return out;
}

void write_corpus_impl(const SynthCorpus& corpus, const SynthSpec& spec, const std::filesystem::path& out,
                       bool images) {
  namespace fs = std::filesystem;
  fs::create_directories(out / "apps");
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
  };
  for (const AppRecord& app : corpus.apps) {
    const fs::path dir = out / "apps" / app.package_id;
    fs::create_directories(dir);
    for (const Screen& s : app.screens) {
      auto f = open(dir / (s.screen_id + ".json"));
      f << serialize_screen(s, 1) << "\n";
      if (images && spec.render) write_image(dir / (s.screen_id + spec.screenshot_extension),
                                   corpus.screenshots.at({app.package_id, s.screen_id}), spec.jpeg_quality);
    }
  }
  {
    auto f = open(out / "metadata.csv");
    f << "package,avg_rating,installs,category\n";
    for (const auto& [pkg, m] : corpus.metadata.apps)
      f << csv::join({pkg, fmt::format("{:.2f}", m.avg_rating), format_installs(m.installs), m.category}) << "\n";
  }
  {
    auto f = open(out / "exclusions.txt");
    for (const auto& pkg : corpus.exclusions) f << pkg << "\n";
  }
  {
    auto f = open(out / "ground_truth.csv");
    f << "package,kind,uses,occluded_count,decoy_count\n";
    for (const auto& t : corpus.truth)
      f << t.package_id << "," << to_string(t.kind) << "," << (t.uses ? 1 : 0) << "," << t.occluded_count << ","
        << t.decoy_count << "\n";
  }
  {
    auto f = open(out / "node_truth.csv");
    f << "package,screen,node_path,kind,role\n";
    for (const auto& n : corpus.nodes)
      f << n.package_id << "," << n.screen_id << "," << format_node_path(n.node_path) << "," << to_string(n.kind) << ","
        << to_string(n.role) << "\n";
  }
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec) { return generate_impl(spec, {}); }

void write_corpus(const SynthCorpus& corpus, const SynthSpec& spec, const std::filesystem::path& out) {
  write_corpus_impl(corpus, spec, out, true);
}

SynthCorpus synthesize_to(const SynthSpec& spec, const std::filesystem::path& out) {
  const auto sink = [&](const std::string& pkg, const std::string& screen, Image8&& img) {
    const auto dir = out / "apps" / pkg;
    std::filesystem::create_directories(dir);
    write_image(dir / (screen + spec.screenshot_extension), img, spec.jpeg_quality);
  };
  SynthCorpus corpus = generate_impl(spec, sink);
  write_corpus_impl(corpus, spec, out, false);
  return corpus;
}

}  // namespace patternscope
