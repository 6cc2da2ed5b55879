// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "patternscope/error.hpp"

namespace patternscope {

namespace {

double median_of(const std::vector<double>& sorted) {
  if (sorted.empty()) return 0.0;
  const std::size_t n = sorted.size();
  return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

void insert_sorted(std::vector<double>& v, double x) {
  v.insert(std::upper_bound(v.begin(), v.end(), x), x);
}

void require_nonempty(const Heatmap& map) {
  if (map.total() <= 0)
    throw DataError("heatmap for " + std::string(to_string(map.kind())) +
                    " is empty; defer negative mining until detections exist");
}

}  // namespace

Heatmap::Heatmap(ComponentKind kind, int cols, int rows) : kind_(kind) {
  if (cols <= 0 || rows <= 0) throw ConfigError("heatmap grid dimensions must be positive");
  counts_.setZero(rows, cols);
}

Cell cell_of(const IntRect& bounds, const Extent& extent, int cols, int rows) {
  // Exact integer arithmetic: center = (l + r) / 2, cell = floor(center * cols / width).
  const std::int64_t cx2 = static_cast<std::int64_t>(bounds.left) + bounds.right;
  const std::int64_t cy2 = static_cast<std::int64_t>(bounds.top) + bounds.bottom;
  auto bin = [](std::int64_t c2, std::int64_t size, int n) {
    const std::int64_t num = c2 * n;
    const std::int64_t den = 2 * size;
    std::int64_t idx = num >= 0 ? num / den : -((-num + den - 1) / den);
    return static_cast<int>(std::clamp<std::int64_t>(idx, 0, n - 1));
  };
  return {bin(cy2, extent.height, rows), bin(cx2, extent.width, cols)};
}

void Heatmap::accumulate(const IntRect& bounds, const Extent& extent) {
  if (!extent.positive()) throw DataError("screen extent must be positive");
  const Cell c = cell_of(bounds, extent, cols(), rows());
  counts_(c.row, c.col) += 1;
  ++total_;
  add_size(static_cast<double>(bounds.width()) / extent.width,
           static_cast<double>(bounds.height()) / extent.height);
}

void Heatmap::accumulate(const Detection& detection, const Screen& screen) {
  if (detection.kind != kind_)
    throw DataError("detection of kind " + std::string(to_string(detection.kind)) +
                    " added to heatmap of kind " + std::string(to_string(kind_)));
  accumulate(detection.bounds, screen.virtual_extent);
}

void Heatmap::add_size(double width_fraction, double height_fraction) {
  insert_sorted(widths_, width_fraction);
  insert_sorted(heights_, height_fraction);
}

void Heatmap::merge(const Heatmap& other) {
  if (other.kind_ != kind_ || other.rows() != rows() || other.cols() != cols())
    throw DataError("cannot merge heatmaps of different kind or shape");
  counts_ += other.counts_;
  total_ += other.total_;
  std::vector<double> w, h;
  std::merge(widths_.begin(), widths_.end(), other.widths_.begin(), other.widths_.end(),
             std::back_inserter(w));
  std::merge(heights_.begin(), heights_.end(), other.heights_.begin(), other.heights_.end(),
             std::back_inserter(h));
  widths_ = std::move(w);
  heights_ = std::move(h);
}

double Heatmap::median_width() const { return median_of(widths_); }
double Heatmap::median_height() const { return median_of(heights_); }

void Heatmap::set_counts(const Grid<std::int64_t>& counts) {
  if ((counts.array() < 0).any()) throw DataError("heatmap counts must be nonnegative");
  counts_ = counts;
  total_ = counts.sum();
}

Grid<double> normalized(const Heatmap& map) {
  require_nonempty(map);
  const double peak = static_cast<double>(map.counts().maxCoeff());
  return map.counts().cast<double>() / peak;
}

Cell argmax_cell(const Heatmap& map) {
  require_nonempty(map);
  // Row-major scan with strict '>' keeps the first (smallest row, col) maximum.
  Cell best;
  std::int64_t best_count = -1;
  for (int r = 0; r < map.rows(); ++r)
    for (int c = 0; c < map.cols(); ++c)
      if (map.counts()(r, c) > best_count) {
        best_count = map.counts()(r, c);
        best = {r, c};
      }
  return best;
}

UnitRect cell_region(const Heatmap& map, const Cell& cell) {
  return {static_cast<double>(cell.col) / map.cols(), static_cast<double>(cell.row) / map.rows(),
          static_cast<double>(cell.col + 1) / map.cols(),
          static_cast<double>(cell.row + 1) / map.rows()};
}

UnitRect argmax_region(const Heatmap& map) { return cell_region(map, argmax_cell(map)); }

std::string serialize_grid(const Heatmap& map) {
  std::ostringstream os;
  os << "# kind=" << to_string(map.kind()) << " cols=" << map.cols() << " rows=" << map.rows()
     << " total=" << map.total() << "\n";
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) os << (c ? " " : "") << map.counts()(r, c);
    os << "\n";
  }
  return os.str();
}

Heatmap parse_grid(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  std::getline(in, header);
  std::string kind_name;
  int cols = 0, rows = 0;
  std::istringstream hs(header);
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
    if (key == "kind") kind_name = value;
    if (key == "cols") cols = std::stoi(value);
    if (key == "rows") rows = std::stoi(value);
  }
  if (kind_name.empty() || cols <= 0 || rows <= 0) throw DataError("bad heatmap grid header: " + header);
  Heatmap map(parse_kind(kind_name), cols, rows);
  Grid<std::int64_t> counts(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (!(in >> counts(r, c))) throw DataError("heatmap grid truncated");
  map.set_counts(counts);
  return map;
}

std::string serialize_sizes(const Heatmap& map) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < map.widths().size(); ++i)
    os << map.widths()[i] << " " << map.heights()[i] << "\n";
  return os.str();
}

void parse_sizes(Heatmap& map, std::string_view text) {
  std::istringstream in{std::string(text)};
  double w, h;
  while (in >> w >> h) map.add_size(w, h);
}

Plane<std::uint8_t> render_heatmap(const Heatmap& map, int scale) {
  Plane<std::uint8_t> img(map.rows() * scale, map.cols() * scale);
  img.setZero();
  if (map.total() == 0) return img;
  const Grid<double> norm = normalized(map);
  for (int r = 0; r < map.rows(); ++r)
    for (int c = 0; c < map.cols(); ++c)
      img.block(r * scale, c * scale, scale, scale)
          .setConstant(static_cast<std::uint8_t>(std::lround(norm(r, c) * 255.0)));
  return img;
}

}  // namespace patternscope
