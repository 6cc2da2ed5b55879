// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patternscope/corpus.hpp"
#include "patternscope/detector.hpp"
#include "patternscope/error.hpp"
#include "patternscope/heatmap.hpp"
#include "patternscope/image.hpp"

namespace patternscope {

inline constexpr double kDefaultMarginFraction = 0.1;
/// Relative difference between horizontal and vertical scale that triggers an
/// aspect-mismatch warning.
inline constexpr double kAspectTolerance = 0.02;

class DegenerateCropError : public DataError {
 public:
  using DataError::DataError;
};

enum class CropLabel { kCandidate, kNegative };
std::string_view to_string(CropLabel label);
CropLabel parse_crop_label(std::string_view text);

struct CropSource {
  std::string package_id;
  std::string screen_id;
  std::optional<NodePath> node_path;
};

struct CropSample {
  ComponentKind kind;
  CropLabel label;
  /// Region in screenshot pixels, margin included.
  IntRect pixel_rect;
  Image8 image;
  CropSource source;
};

struct PixelMapping {
  IntRect rect;
  bool aspect_mismatch = false;
};

/// Maps virtual-space bounds to screenshot pixels. Horizontal and vertical
/// scale are image/virtual per axis; coordinates are rounded half away from
/// zero, then clamped to the image. Throws DegenerateCropError when nothing
/// of the rectangle remains.
PixelMapping map_to_pixels(const IntRect& bounds, const Extent& virtual_extent, const Extent& image);
IntRect to_pixel_rect(const IntRect& bounds, const Extent& virtual_extent, const Extent& image);

/// Grows `rect` by margin_fraction * max(width, height) on every side and
/// clamps to `image_bounds`.
IntRect expand_with_margin(const IntRect& rect, double margin_fraction, const IntRect& image_bounds);

CropSample crop_with_margin(const Image8& screenshot, const IntRect& pixel_rect, double margin_fraction,
                            ComponentKind kind, CropSource source);

/// Pixel rectangle centered on the heatmap's most frequent cell, sized to the
/// kind's median detection size.
IntRect negative_region(const Heatmap& heatmap, const Extent& image);

/// Crops the most probable location of `heatmap.kind()` from a screen that has
/// no candidate of that kind. Throws DataError when the heatmap is empty.
CropSample negative_sample(const Image8& screenshot, const Heatmap& heatmap, double margin_fraction,
                           CropSource source);

using ScreenshotLoader = std::function<Image8(const AppRecord&, const Screen&)>;
/// Reads screen.screenshot.path from disk.
Image8 load_screenshot(const AppRecord& app, const Screen& screen);

struct CropOptions {
  double margin_fraction = kDefaultMarginFraction;
  bool mine_negatives = true;
};

struct CropBatch {
  std::vector<CropSample> samples;
  std::vector<std::string> warnings;
};

/// Candidate crops for every detection of `app`, plus one negative per
/// (screen, kind) pair without a candidate when that kind's heatmap is
/// nonempty. Samples are ordered by screen, then candidates in detection
/// order, then negatives in kind order.
CropBatch extract_crops(const AppRecord& app, const AppDetections& detections,
                        const std::map<ComponentKind, Heatmap>& heatmaps, const ScreenshotLoader& loader,
                        const CropOptions& options = {});

/// `<package>__<screen>__<n>.png`
std::string crop_file_name(const CropSource& source, int n);

struct CropIndexRow {
  ComponentKind kind;
  CropLabel label;
  std::string package_id;
  std::string screen_id;
  IntRect rect;
  std::optional<NodePath> node_path;
  /// Relative to the crop output root.
  std::filesystem::path file;
};

/// Writes `<out>/<kind>/<label>/<file>` for each sample and returns the index rows.
/// File counters restart per (package, screen).
std::vector<CropIndexRow> write_crops(const std::filesystem::path& out, const std::vector<CropSample>& samples);

/// crops.csv: kind,label,package,screen,rect,node_path,file
void write_crop_index(const std::filesystem::path& path, const std::vector<CropIndexRow>& rows);
std::vector<CropIndexRow> read_crop_index(const std::filesystem::path& path);

std::string format_rect(const IntRect& r);  // "l t r b"
IntRect parse_rect(std::string_view text);

}  // namespace patternscope
