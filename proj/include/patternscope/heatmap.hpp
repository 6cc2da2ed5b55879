// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "patternscope/detector.hpp"
#include "patternscope/geometry.hpp"
#include "patternscope/image.hpp"

namespace patternscope {

template <typename Scalar>
using Grid = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kDefaultHeatmapCols = 36;
inline constexpr int kDefaultHeatmapRows = 64;

/// Frequency of detection centers over normalized screen space. Cells are
/// half-open, so a center on a boundary lands in the higher-index cell.
class Heatmap {
 public:
  explicit Heatmap(ComponentKind kind, int cols = kDefaultHeatmapCols, int rows = kDefaultHeatmapRows);

  ComponentKind kind() const { return kind_; }
  int cols() const { return static_cast<int>(counts_.cols()); }
  int rows() const { return static_cast<int>(counts_.rows()); }
  const Grid<std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const { return total_; }

  /// Adds one detection; `extent` is the screen's virtual coordinate space.
  void accumulate(const IntRect& bounds, const Extent& extent);
  void accumulate(const Detection& detection, const Screen& screen);

  /// Cell-wise sum with another map of the same kind and shape.
  void merge(const Heatmap& other);

  /// Median detection size as a fraction of the screen (width, height).
  /// Zero when nothing has been accumulated.
  double median_width() const;
  double median_height() const;
  const std::vector<double>& widths() const { return widths_; }
  const std::vector<double>& heights() const { return heights_; }
  void add_size(double width_fraction, double height_fraction);

  /// Replaces the counts wholesale (used when reading a serialized grid).
  void set_counts(const Grid<std::int64_t>& counts);

  friend bool operator==(const Heatmap& a, const Heatmap& b) {
    return a.kind_ == b.kind_ && a.counts_ == b.counts_ && a.total_ == b.total_ &&
           a.widths_ == b.widths_ && a.heights_ == b.heights_;
  }

 private:
  ComponentKind kind_;
  Grid<std::int64_t> counts_;
  std::int64_t total_ = 0;
  std::vector<double> widths_;   // sorted
  std::vector<double> heights_;  // sorted
};

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Grid cell containing the center of `bounds` within `extent`.
Cell cell_of(const IntRect& bounds, const Extent& extent, int cols, int rows);

/// counts / max(counts). Throws DataError on an empty map.
Grid<double> normalized(const Heatmap& map);

/// Cell with the maximum count; ties go to the smallest (row, col).
Cell argmax_cell(const Heatmap& map);
UnitRect cell_region(const Heatmap& map, const Cell& cell);
UnitRect argmax_region(const Heatmap& map);

/// Grid file: a `# kind=... cols=... rows=... total=...` line then one row of
/// counts per line.
std::string serialize_grid(const Heatmap& map);
Heatmap parse_grid(std::string_view text);

/// Size samples, one "width height" pair per line.
std::string serialize_sizes(const Heatmap& map);
void parse_sizes(Heatmap& map, std::string_view text);

/// Grayscale rendering of the normalized map, `scale` pixels per cell.
Plane<std::uint8_t> render_heatmap(const Heatmap& map, int scale = 8);

}  // namespace patternscope
