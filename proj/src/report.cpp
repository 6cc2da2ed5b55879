// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "patternscope/csv.hpp"
#include "patternscope/error.hpp"
#include "patternscope/heatmap.hpp"

namespace patternscope {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }
std::string fixed(double v, int digits) { return fmt::format("{:.{}f}", v, digits); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
    else if (!out.empty() && out.back() != '_') out.push_back('_');
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "unnamed" : out;
}

std::string svg_open(int w, int h, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      w, h, w / 2, xml_escape(title));
}

constexpr std::array<const char*, 4> kSeriesColors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};

double to_double(const std::string& s, const fs::path& source) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "' in " + source.string(), 0);
  }
}

Image8 to_image8(const ImageF& f) {
  Image8 out(f.width(), f.height());
  for (int c = 0; c < 3; ++c)
    out.planes[static_cast<std::size_t>(c)] =
        f.planes[static_cast<std::size_t>(c)].round().max(0.0f).min(255.0f).cast<std::uint8_t>();
  return out;
}

}  // namespace

std::string format_percent_value(double fraction) { return fixed(100.0 * fraction, 1); }
std::string format_percent(double fraction) { return format_percent_value(fraction) + "%"; }

void write_analysis(const fs::path& dir, const AnalysisResults& r) {
  if (r.analyzable == 0 || (r.group_usage.empty() && r.box_plots.empty() && r.curves.empty()))
    throw DataError("empty analysis: no analyzable apps");
  fs::create_directories(dir);

  std::string gu = "metric,predicate,threshold,low_n,low_users,low_rate,low_pct,high_n,high_users,high_rate,high_pct,high_share\n";
  for (const auto& g : r.group_usage)
    gu += csv::join({std::string(to_string(g.metric)), g.predicate, num(g.threshold), std::to_string(g.low_n),
                     std::to_string(g.low_users), num(g.low_rate), format_percent_value(g.low_rate),
                     std::to_string(g.high_n), std::to_string(g.high_users), num(g.high_rate),
                     format_percent_value(g.high_rate), g.high_share ? num(*g.high_share) : ""}) +
          "\n";
  write_text(dir / "group_usage.csv", gu);

  std::string bp = "metric,predicate,uses,n,min,q1,median,q3,max,whisker_low,whisker_high\n";
  for (const auto& b : r.box_plots) {
    const auto& s = b.summary;
    bp += csv::join({std::string(to_string(b.metric)), b.predicate, b.uses ? "1" : "0", std::to_string(s.n), num(s.min),
                     num(s.q1), num(s.median), num(s.q3), num(s.max), num(s.whisker_low), num(s.whisker_high)}) +
          "\n";
  }
  write_text(dir / "box_plots.csv", bp);

  std::string bc = "metric,predicate,bucket,app_count,positive_count,fraction,pct\n";
  std::string co = "metric,predicate,k,n,rho,p_value\n";
  for (const auto& c : r.curves) {
    const std::string metric(to_string(c.curve.metric));
    for (int b = 0; b < c.curve.k; ++b) {
      const auto i = static_cast<std::size_t>(b);
      bc += csv::join({metric, c.predicate, std::to_string(b + 1), std::to_string(c.curve.app_count[i]),
                       std::to_string(c.curve.positive_count[i]), num(c.curve.fraction[i]),
                       format_percent_value(c.curve.fraction[i])}) +
            "\n";
    }
    if (c.correlation)
      co += csv::join({metric, c.predicate, std::to_string(c.curve.k), std::to_string(c.correlation->n),
                       num(c.correlation->rho), num(c.correlation->p_value)}) +
            "\n";
  }
  write_text(dir / "bucket_curves.csv", bc);
  write_text(dir / "correlations.csv", co);

  std::string cu = "predicate,rank,category,app_count,users,rate,pct\n";
  for (const auto& row : r.categories) {
    int rank = 0;
    for (const auto& c : row.rates)
      cu += csv::join({row.predicate, std::to_string(++rank), c.category, std::to_string(c.app_count),
                       std::to_string(c.users), num(c.rate), format_percent_value(c.rate)}) +
            "\n";
  }
  write_text(dir / "category_usage.csv", cu);

  ordered_json j;
  j["analyzable_apps"] = r.analyzable;
  ordered_json splits = ordered_json::object();
  for (const auto& [metric, s] : r.splits)
    splits[std::string(to_string(metric))] = {{"threshold", s.threshold},
                                              {"low_n", s.low_group.size()},
                                              {"high_n", s.high_group.size()}};
  j["splits"] = splits;
  ordered_json corr = ordered_json::array();
  for (const auto& c : r.curves)
    if (c.correlation)
      corr.push_back({{"metric", std::string(to_string(c.curve.metric))},
                      {"predicate", c.predicate},
                      {"k", c.curve.k},
                      {"rho", c.correlation->rho},
                      {"p_value", c.correlation->p_value}});
  j["correlations"] = corr;
  j["notes"] = r.notes;
  write_text(dir / "summary.json", j.dump(2) + "\n");
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& series,
                          const std::vector<BarGroup>& groups) {
  if (groups.empty() || series.empty()) throw DataError("bar chart needs at least one group and series");
  constexpr int kBar = 28, kGap = 24, kLeft = 50, kTop = 40, kPlot = 220, kLegend = 20;
  const int ns = static_cast<int>(series.size());
  const int w = kLeft + static_cast<int>(groups.size()) * (ns * kBar + kGap) + 20;
  const int h = kTop + kPlot + 60 + kLegend * ns;
  double vmax = 0;
  for (const auto& g : groups) {
    if (static_cast<int>(g.values.size()) != ns) throw DataError("bar group '" + g.label + "' has the wrong series count");
    for (double v : g.values) vmax = std::max(vmax, v);
  }
  const double top = vmax > 0 ? vmax * 1.15 : 1.0;
  std::string s = svg_open(w, h, title);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop, kTop + kPlot);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft, kTop + kPlot, w - 10);
  int x = kLeft + kGap / 2;
  for (const auto& g : groups) {
    for (int i = 0; i < ns; ++i) {
      const double v = g.values[static_cast<std::size_t>(i)];
      const double bh = kPlot * v / top;
      const double y = kTop + kPlot - bh;
      s += fmt::format("<rect class=\"bar\" x=\"{}\" y=\"{:.2f}\" width=\"{}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y,
                       kBar - 2, bh, kSeriesColors[static_cast<std::size_t>(i) % kSeriesColors.size()]);
      s += fmt::format("<text class=\"value\" x=\"{}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"9\">{}</text>\n",
                       x + kBar / 2 - 1, y - 3, format_percent(v));
      x += kBar;
    }
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x - ns * kBar / 2, kTop + kPlot + 16,
                     xml_escape(g.label));
    x += kGap;
  }
  for (int i = 0; i < ns; ++i) {
    const int y = kTop + kPlot + 40 + kLegend * i;
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", kLeft, y,
                     kSeriesColors[static_cast<std::size_t>(i) % kSeriesColors.size()]);
    s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + 18, y + 10, xml_escape(series[static_cast<std::size_t>(i)]));
  }
  return s + "</svg>\n";
}

std::string box_plot_svg(const std::string& title, const std::vector<BoxEntry>& boxes, bool log_scale) {
  if (boxes.empty()) throw DataError("box plot needs at least one box");
  constexpr int kLeft = 60, kTop = 40, kPlot = 240, kBox = 36, kGap = 28;
  const int w = kLeft + static_cast<int>(boxes.size()) * (kBox + kGap) + 20;
  const int h = kTop + kPlot + 90;
  auto tr = [&](double v) { return log_scale ? std::log10(std::max(v, 1.0)) : v; };
  double lo = tr(boxes.front().summary.whisker_low), hi = tr(boxes.front().summary.whisker_high);
  for (const auto& b : boxes) {
    lo = std::min({lo, tr(b.summary.whisker_low), tr(b.summary.min)});
    hi = std::max({hi, tr(b.summary.whisker_high), tr(b.summary.max)});
  }
  if (hi <= lo) hi = lo + 1;
  auto y = [&](double v) { return kTop + kPlot * (1.0 - (tr(v) - lo) / (hi - lo)); };
  std::string s = svg_open(w, h, title);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop, kTop + kPlot);
  s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 4, y(log_scale ? std::pow(10, lo) : lo) + 4,
                   fmt::format("{:g}", log_scale ? std::pow(10, lo) : lo));
  s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 4, y(log_scale ? std::pow(10, hi) : hi) + 4,
                   fmt::format("{:g}", log_scale ? std::pow(10, hi) : hi));
  int x = kLeft + kGap / 2;
  for (const auto& b : boxes) {
    const auto& f = b.summary;
    const int cx = x + kBox / 2;
    s += fmt::format("<g class=\"box\">\n");
    s += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{0}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", cx, y(f.whisker_high), y(f.q3));
    s += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{0}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", cx, y(f.q1), y(f.whisker_low));
    s += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"{}\" height=\"{:.2f}\" fill=\"#9ecae1\" stroke=\"black\"/>\n", x,
                     y(f.q3), kBox, std::max(0.0, y(f.q1) - y(f.q3)));
    s += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"black\" stroke-width=\"2\"/>\n", x,
                     y(f.median), x + kBox, y(f.median));
    for (double wv : {f.whisker_low, f.whisker_high})
      s += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", x + 8, y(wv), x + kBox - 8, y(wv));
    s += "</g>\n";
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" transform=\"rotate(-40 {} {})\">{}</text>\n", cx,
                     kTop + kPlot + 14, cx, kTop + kPlot + 14, xml_escape(b.label));
    x += kBox + kGap;
  }
  return s + "</svg>\n";
}

std::string line_chart_svg(const std::string& title, const std::vector<double>& fractions) {
  if (fractions.empty()) throw DataError("line chart needs at least one point");
  constexpr int kLeft = 50, kTop = 40, kPlotW = 500, kPlotH = 240;
  const int w = kLeft + kPlotW + 30, h = kTop + kPlotH + 50;
  const std::size_t n = fractions.size();
  auto px = [&](std::size_t i) { return n == 1 ? kLeft + kPlotW / 2.0 : kLeft + kPlotW * static_cast<double>(i) / (n - 1); };
  auto py = [&](double v) { return kTop + kPlotH * (1.0 - v); };
  std::string s = svg_open(w, h, title);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop, kTop + kPlotH);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft, kTop + kPlotH, kLeft + kPlotW);
  for (double t : {0.0, 0.5, 1.0})
    s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 4, py(t) + 4, format_percent(t));
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">bucket (1..{})</text>\n", kLeft + kPlotW / 2,
                   kTop + kPlotH + 30, n);
  s += "<polyline class=\"curve\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i) s += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(i), py(fractions[i]));
  s += "\"/>\n";
  return s + "</svg>\n";
}

ContactSheet contact_sheet(const std::vector<Image8>& crops, int thumb, int max_cols) {
  if (crops.empty()) throw DataError("contact sheet needs at least one crop");
  if (thumb <= 0 || max_cols <= 0) throw ConfigError("contact sheet cell size and columns must be positive");
  constexpr int kPad = 4;
  ContactSheet sheet;
  sheet.thumbnails = static_cast<int>(crops.size());
  sheet.cols = std::min(max_cols, sheet.thumbnails);
  sheet.rows = (sheet.thumbnails + sheet.cols - 1) / sheet.cols;
  sheet.image = Image8(sheet.cols * (thumb + kPad) + kPad, sheet.rows * (thumb + kPad) + kPad);
  sheet.image.fill(230, 230, 230);
  for (int i = 0; i < sheet.thumbnails; ++i) {
    const Image8& c = crops[static_cast<std::size_t>(i)];
    if (c.empty()) throw DataError("contact sheet crop is empty");
    const double scale = std::min(static_cast<double>(thumb) / c.width(), static_cast<double>(thumb) / c.height());
    const int tw = std::max(1, static_cast<int>(std::lround(c.width() * scale)));
    const int th = std::max(1, static_cast<int>(std::lround(c.height() * scale)));
    const Image8 t = to_image8(resize_area(c, tw, th));
    const int x0 = kPad + (i % sheet.cols) * (thumb + kPad) + (thumb - tw) / 2;
    const int y0 = kPad + (i / sheet.cols) * (thumb + kPad) + (thumb - th) / 2;
    for (int p = 0; p < 3; ++p)
      sheet.image.planes[static_cast<std::size_t>(p)].block(y0, x0, th, tw) = t.planes[static_cast<std::size_t>(p)];
  }
  return sheet;
}

std::vector<std::string> render_reports(const ReportInputs& in, const fs::path& out) {
  std::vector<std::string> written;
  auto emit = [&](const fs::path& rel, const std::string& text) {
    fs::create_directories((out / rel).parent_path());
    write_text(out / rel, text);
    written.push_back(rel.generic_string());
  };

  const fs::path gu_path = in.analysis_dir / "group_usage.csv";
  const fs::path bp_path = in.analysis_dir / "box_plots.csv";
  const fs::path bc_path = in.analysis_dir / "bucket_curves.csv";
  for (const auto& p : {gu_path, bp_path, bc_path})
    if (!fs::exists(p)) throw DataError("analysis output missing: " + p.string());
  const csv::Table gu = csv::read(gu_path);
  const csv::Table bp = csv::read(bp_path);
  const csv::Table bc = csv::read(bc_path);
  if (gu.rows.empty() && bp.rows.empty() && bc.rows.empty())
    throw DataError("empty analysis input: nothing to report");

  {
    const int cm = gu.require("metric", gu_path), cp = gu.require("predicate", gu_path),
              ct = gu.require("threshold", gu_path), cl = gu.require("low_rate", gu_path),
              ch = gu.require("high_rate", gu_path);
    std::map<std::string, std::pair<std::string, std::vector<BarGroup>>> by_metric;
    for (const auto& row : gu.rows) {
      auto& [threshold, groups] = by_metric[row[cm]];
      threshold = row[ct];
      groups.push_back({row[cp], {to_double(row[cl], gu_path), to_double(row[ch], gu_path)}});
    }
    for (const auto& [metric, entry] : by_metric) {
      const std::string t = fmt::format("{:g}", to_double(entry.first, gu_path));
      emit(fmt::format("usage_by_{}.svg", metric),
           bar_chart_svg("Usage by " + metric + " group", {metric + " < " + t, metric + " >= " + t}, entry.second));
    }
  }
  {
    const int cm = bp.require("metric", bp_path), cp = bp.require("predicate", bp_path), cu = bp.require("uses", bp_path);
    std::map<std::string, std::vector<BoxEntry>> by_metric;
    for (const auto& row : bp.rows) {
      FiveNumberSummary f;
      f.n = static_cast<std::size_t>(std::stoul(row[static_cast<std::size_t>(bp.require("n", bp_path))]));
      auto get = [&](const char* name) { return to_double(row[static_cast<std::size_t>(bp.require(name, bp_path))], bp_path); };
      f.min = get("min");
      f.q1 = get("q1");
      f.median = get("median");
      f.q3 = get("q3");
      f.max = get("max");
      f.whisker_low = get("whisker_low");
      f.whisker_high = get("whisker_high");
      by_metric[row[cm]].push_back({row[cp] + (row[cu] == "1" ? " users" : " others"), f});
    }
    for (const auto& [metric, boxes] : by_metric)
      emit(fmt::format("box_{}.svg", metric), box_plot_svg(metric + " by component usage", boxes, metric == "installs"));
  }
  {
    const int cm = bc.require("metric", bc_path), cp = bc.require("predicate", bc_path), cf = bc.require("fraction", bc_path);
    std::map<std::pair<std::string, std::string>, std::vector<double>> curves;
    for (const auto& row : bc.rows) curves[{row[cm], row[cp]}].push_back(to_double(row[cf], bc_path));
    for (const auto& [key, ys] : curves)
      emit(fmt::format("curve_{}_{}.svg", key.first, key.second),
           line_chart_svg(key.second + " usage by " + key.first + " percentile bucket", ys));
  }

  for (ComponentKind k : kAllKinds) {
    const fs::path grid = in.heatmap_dir / (std::string(to_string(k)) + ".grid");
    if (!fs::exists(grid)) continue;
    std::ifstream f(grid, std::ios::binary);
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const Heatmap map = parse_grid(text);
    if (map.total() == 0) continue;
    const fs::path rel = fs::path("heatmaps") / (std::string(to_string(k)) + ".png");
    fs::create_directories((out / rel).parent_path());
    write_gray_png(out / rel, render_heatmap(map));
    written.push_back(rel.generic_string());
  }

  const fs::path scores_path = in.verify_dir / "scores.csv";
  if (fs::exists(scores_path)) {
    std::map<std::string, std::string> category;
    for (const auto& a : in.apps) category[a.package_id] = a.metadata ? a.metadata->category : "Uncategorized";
    const csv::Table sc = csv::read(scores_path);
    const int cfile = sc.require("file", scores_path), ckind = sc.require("kind", scores_path),
              cpkg = sc.require("package", scores_path), cpos = sc.require("positive", scores_path);
    std::map<std::pair<std::string, std::string>, std::vector<fs::path>> groups;
    for (const auto& row : sc.rows) {
      if (row[static_cast<std::size_t>(cpos)] != "1") continue;
      const auto it = category.find(row[static_cast<std::size_t>(cpkg)]);
      groups[{row[static_cast<std::size_t>(ckind)], it == category.end() ? "Uncategorized" : it->second}].push_back(
          row[static_cast<std::size_t>(cfile)]);
    }
    std::string index = "kind,category,thumbnails,file\n";
    for (const auto& [key, files] : groups) {
      std::vector<Image8> crops;
      for (const auto& f : files) crops.push_back(read_image(in.crop_dir / f));
      const ContactSheet sheet = contact_sheet(crops);
      const fs::path rel = fs::path("contact") / key.first / (slug(key.second) + ".png");
      fs::create_directories((out / rel).parent_path());
      write_image(out / rel, sheet.image);
      written.push_back(rel.generic_string());
      index += csv::join({key.first, key.second, std::to_string(sheet.thumbnails), rel.generic_string()}) + "\n";
    }
    emit("contact_sheets.csv", index);
  }
  return written;
}

}  // namespace patternscope
