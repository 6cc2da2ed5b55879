// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>

#include "patternscope/geometry.hpp"

namespace patternscope {

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Planar RGB image. Row index is y, column index is x.
template <typename Scalar>
struct Image {
  std::array<Plane<Scalar>, 3> planes;

  Image() = default;
  Image(int width, int height) {
    for (auto& p : planes) p.setZero(height, width);
  }

  int width() const { return static_cast<int>(planes[0].cols()); }
  int height() const { return static_cast<int>(planes[0].rows()); }
  Extent extent() const { return {width(), height()}; }
  bool empty() const { return planes[0].size() == 0; }
  IntRect bounds() const { return {0, 0, width(), height()}; }

  void fill(Scalar r, Scalar g, Scalar b) {
    planes[0].setConstant(r);
    planes[1].setConstant(g);
    planes[2].setConstant(b);
  }

  friend bool operator==(const Image& a, const Image& b) {
    if (a.width() != b.width() || a.height() != b.height()) return false;
    for (int c = 0; c < 3; ++c)
      if (!(a.planes[c] == b.planes[c]).all()) return false;
    return true;
  }
};

using Image8 = Image<std::uint8_t>;
using ImageF = Image<float>;
using Rgb = std::array<std::uint8_t, 3>;

/// Copies the pixels of `rect` out of `img`. `rect` must lie inside the image.
template <typename Scalar>
Image<Scalar> crop(const Image<Scalar>& img, const IntRect& rect) {
  Image<Scalar> out;
  for (int c = 0; c < 3; ++c)
    out.planes[c] = img.planes[c].block(rect.top, rect.left, rect.height(), rect.width());
  return out;
}

/// Area-averaging resample to width x height. Each output pixel is the
/// overlap-weighted mean of the source pixels its footprint covers, which also
/// handles upsampling.
ImageF resize_area(const Image8& img, int width, int height);

void fill_rect(Image8& img, const IntRect& rect, const Rgb& color);
/// Fills the pixels whose centers fall in the disc inscribed in `rect`.
void fill_disc(Image8& img, const IntRect& rect, const Rgb& color);

/// Counts pixels within `tolerance` (per channel) of `color` inside `rect`.
std::int64_t count_color(const Image8& img, const IntRect& rect, const Rgb& color,
                         int tolerance);

// Codecs. Format is chosen from the file extension (.png, .jpg/.jpeg).
Image8 read_image(const std::filesystem::path& path);
Extent probe_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image8& img, int jpeg_quality = 92);
void write_gray_png(const std::filesystem::path& path, const Plane<std::uint8_t>& gray);

}  // namespace patternscope
