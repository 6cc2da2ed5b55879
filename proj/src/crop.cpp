// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/crop.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "patternscope/csv.hpp"

namespace patternscope {

namespace {

int round_coord(double v) { return static_cast<int>(std::lround(v)); }

IntRect clamp_to(const IntRect& r, const IntRect& bounds) { return r.intersect(bounds); }

}  // namespace

std::string_view to_string(CropLabel label) {
  return label == CropLabel::kCandidate ? "candidate" : "negative";
}

CropLabel parse_crop_label(std::string_view text) {
  if (text == "candidate") return CropLabel::kCandidate;
  if (text == "negative") return CropLabel::kNegative;
  throw DataError("unknown crop label '" + std::string(text) + "'");
}

PixelMapping map_to_pixels(const IntRect& bounds, const Extent& virtual_extent, const Extent& image) {
  if (!virtual_extent.positive() || !image.positive())
    throw DataError("virtual extent and image dimensions must be positive");
  const double sx = static_cast<double>(image.width) / virtual_extent.width;
  const double sy = static_cast<double>(image.height) / virtual_extent.height;
  PixelMapping m;
  m.aspect_mismatch = std::abs(sx - sy) > kAspectTolerance * std::max(sx, sy);
  const IntRect scaled{round_coord(bounds.left * sx), round_coord(bounds.top * sy),
                       round_coord(bounds.right * sx), round_coord(bounds.bottom * sy)};
  m.rect = clamp_to(scaled, {0, 0, image.width, image.height});
  if (m.rect.empty()) {
    std::ostringstream os;
    os << "degenerate crop: bounds " << bounds << " map to " << scaled << " in a " << image.width
       << "x" << image.height << " image";
    throw DegenerateCropError(os.str());
  }
  return m;
}

IntRect to_pixel_rect(const IntRect& bounds, const Extent& virtual_extent, const Extent& image) {
  return map_to_pixels(bounds, virtual_extent, image).rect;
}

IntRect expand_with_margin(const IntRect& rect, double margin_fraction, const IntRect& image_bounds) {
  if (margin_fraction < 0) throw ConfigError("margin fraction must be nonnegative");
  const int m = round_coord(margin_fraction * std::max(rect.width(), rect.height()));
  return clamp_to({rect.left - m, rect.top - m, rect.right + m, rect.bottom + m}, image_bounds);
}

CropSample crop_with_margin(const Image8& screenshot, const IntRect& pixel_rect, double margin_fraction,
                            ComponentKind kind, CropSource source) {
  const IntRect r = expand_with_margin(pixel_rect, margin_fraction, screenshot.bounds());
  if (r.empty()) throw DegenerateCropError("degenerate crop after clamping");
  return {kind, CropLabel::kCandidate, r, crop(screenshot, r), std::move(source)};
}

IntRect negative_region(const Heatmap& heatmap, const Extent& image) {
  const UnitRect cell = argmax_region(heatmap);
  double w = heatmap.median_width();
  double h = heatmap.median_height();
  if (w <= 0 || h <= 0) {
    w = cell.width();
    h = cell.height();
  }
  const double cx = cell.center_x() * image.width;
  const double cy = cell.center_y() * image.height;
  const double pw = std::max(1.0, w * image.width);
  const double ph = std::max(1.0, h * image.height);
  const IntRect r{round_coord(cx - pw / 2), round_coord(cy - ph / 2), round_coord(cx + pw / 2),
                  round_coord(cy + ph / 2)};
  return clamp_to(r, {0, 0, image.width, image.height});
}

CropSample negative_sample(const Image8& screenshot, const Heatmap& heatmap, double margin_fraction,
                           CropSource source) {
  const IntRect base = negative_region(heatmap, screenshot.extent());
  const IntRect r = expand_with_margin(base, margin_fraction, screenshot.bounds());
  if (r.empty()) throw DegenerateCropError("degenerate negative crop");
  return {heatmap.kind(), CropLabel::kNegative, r, crop(screenshot, r), std::move(source)};
}

Image8 load_screenshot(const AppRecord&, const Screen& screen) {
  return read_image(screen.screenshot.path);
}

CropBatch extract_crops(const AppRecord& app, const AppDetections& detections,
                        const std::map<ComponentKind, Heatmap>& heatmaps, const ScreenshotLoader& loader,
                        const CropOptions& options) {
  CropBatch batch;
  for (const Screen& screen : app.screens) {
    std::vector<const Detection*> here;
    std::map<ComponentKind, bool> has_candidate;
    for (const auto& [kind, list] : detections)
      for (const Detection& d : list)
        if (d.screen_id == screen.screen_id) {
          here.push_back(&d);
          has_candidate[kind] = true;
        }
    std::vector<ComponentKind> negative_kinds;
    if (options.mine_negatives)
      for (const auto& [kind, map] : heatmaps)
        if (!has_candidate[kind] && map.total() > 0) negative_kinds.push_back(kind);
    if (here.empty() && negative_kinds.empty()) continue;

    // Detections of one screen arrive grouped by kind; restore traversal order.
    std::stable_sort(here.begin(), here.end(), [](const Detection* a, const Detection* b) {
      return a->node_path < b->node_path;
    });

    Image8 shot;
    try {
      shot = loader(app, screen);
    } catch (const Error& e) {
      batch.warnings.push_back(app.package_id + "/" + screen.screen_id + ": " + e.what());
      continue;
    }
    for (const Detection* d : here) {
      try {
        const PixelMapping m = map_to_pixels(d->bounds, screen.virtual_extent, shot.extent());
        if (m.aspect_mismatch)
          batch.warnings.push_back(app.package_id + "/" + screen.screen_id +
                                   ": screenshot aspect differs from hierarchy space");
        batch.samples.push_back(crop_with_margin(shot, m.rect, options.margin_fraction, d->kind,
                                                 {app.package_id, screen.screen_id, d->node_path}));
      } catch (const DegenerateCropError& e) {
        batch.warnings.push_back(app.package_id + "/" + screen.screen_id + " " +
                                 format_node_path(d->node_path) + ": " + e.what() + ", dropped");
      }
    }
    for (ComponentKind kind : negative_kinds) {
      try {
        batch.samples.push_back(negative_sample(shot, heatmaps.at(kind), options.margin_fraction,
                                                {app.package_id, screen.screen_id, std::nullopt}));
      } catch (const DegenerateCropError& e) {
        batch.warnings.push_back(app.package_id + "/" + screen.screen_id + ": " + e.what());
      }
    }
  }
  return batch;
}

std::string crop_file_name(const CropSource& source, int n) {
  return source.package_id + "__" + source.screen_id + "__" + std::to_string(n) + ".png";
}

std::vector<CropIndexRow> write_crops(const std::filesystem::path& out, const std::vector<CropSample>& samples) {
  std::vector<CropIndexRow> rows;
  std::map<std::pair<std::string, std::string>, int> counters;
  for (const CropSample& s : samples) {
    const int n = counters[{s.source.package_id, s.source.screen_id}]++;
    const std::filesystem::path rel =
        std::filesystem::path(std::string(to_string(s.kind))) / std::string(to_string(s.label)) /
        crop_file_name(s.source, n);
    std::filesystem::create_directories((out / rel).parent_path());
    write_image(out / rel, s.image);
    rows.push_back({s.kind, s.label, s.source.package_id, s.source.screen_id, s.pixel_rect,
                    s.source.node_path, rel});
  }
  return rows;
}

std::string format_rect(const IntRect& r) {
  return std::to_string(r.left) + " " + std::to_string(r.top) + " " + std::to_string(r.right) + " " +
         std::to_string(r.bottom);
}

IntRect parse_rect(std::string_view text) {
  std::istringstream in{std::string(text)};
  IntRect r;
  if (!(in >> r.left >> r.top >> r.right >> r.bottom))
    throw DataError("bad rectangle '" + std::string(text) + "'");
  return r;
}

void write_crop_index(const std::filesystem::path& path, const std::vector<CropIndexRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "kind,label,package,screen,rect,node_path,file\n";
  for (const auto& r : rows)
    out << csv::join({std::string(to_string(r.kind)), std::string(to_string(r.label)), r.package_id,
                      r.screen_id, format_rect(r.rect), r.node_path ? format_node_path(*r.node_path) : "",
                      r.file.generic_string()})
        << "\n";
}

std::vector<CropIndexRow> read_crop_index(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const int ck = t.require("kind", path), cl = t.require("label", path), cp = t.require("package", path),
            cs = t.require("screen", path), cr = t.require("rect", path), cn = t.require("node_path", path),
            cf = t.require("file", path);
  std::vector<CropIndexRow> rows;
  for (const auto& row : t.rows) {
    if (row.size() < t.header.size()) throw DataError(path.string() + ": short row");
    CropIndexRow r{parse_kind(row[ck]), parse_crop_label(row[cl]), row[cp], row[cs], parse_rect(row[cr]),
                   std::nullopt, row[cf]};
    if (!row[cn].empty()) r.node_path = parse_node_path(row[cn]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace patternscope
