// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>

namespace patternscope {

/// Integer rectangle, half-open on the right/bottom edge: [left, right) x [top, bottom).
struct IntRect {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  constexpr int width() const { return right - left; }
  constexpr int height() const { return bottom - top; }
  constexpr std::int64_t area() const {
    return static_cast<std::int64_t>(std::max(0, width())) * std::max(0, height());
  }
  constexpr bool empty() const { return width() <= 0 || height() <= 0; }
  constexpr bool is_normalized() const { return left <= right && top <= bottom; }

  constexpr IntRect normalized() const {
    return {std::min(left, right), std::min(top, bottom), std::max(left, right),
            std::max(top, bottom)};
  }

  constexpr bool contains(const IntRect& o) const {
    return o.left >= left && o.top >= top && o.right <= right && o.bottom <= bottom;
  }

  constexpr IntRect intersect(const IntRect& o) const {
    return {std::max(left, o.left), std::max(top, o.top), std::min(right, o.right),
            std::min(bottom, o.bottom)};
  }

  friend constexpr bool operator==(const IntRect&, const IntRect&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const IntRect& r) {
  return os << '(' << r.left << ',' << r.top << ',' << r.right << ',' << r.bottom << ')';
}

struct Extent {
  int width = 0;
  int height = 0;

  constexpr bool positive() const { return width > 0 && height > 0; }
  friend constexpr bool operator==(const Extent&, const Extent&) = default;
};

/// Rectangle in normalized screen space, [0,1]^2.
struct UnitRect {
  double left = 0, top = 0, right = 0, bottom = 0;
  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double center_x() const { return 0.5 * (left + right); }
  double center_y() const { return 0.5 * (top + bottom); }
  friend bool operator==(const UnitRect&, const UnitRect&) = default;
};

}  // namespace patternscope
