// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include "patternscope/stats.hpp"

#include <algorithm>
#include <limits>

namespace patternscope {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

// x^a y^b / (a B(a, b))
double beta_front(double a, double b, double x, double y) {
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp(a * std::log(x) + b * std::log(y) - lbeta) / a;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0) || !(b > 0)) throw DataError("incomplete beta: parameters must be positive");
  if (x < 0 || x > 1 || y < 0 || y > 1) throw DataError("incomplete beta: x out of [0,1]");
  if (x == 0) return 0.0;
  if (y == 0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return beta_front(a, b, x, y) * beta_continued_fraction(a, b, x);
  return 1.0 - beta_front(b, a, y, x) * beta_continued_fraction(b, a, y);
}

double student_t_two_tailed(double t, double dof) {
  if (!(dof > 0)) throw DataError("student t: degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t2), t2 / (dof + t2));
}

double pearson_p_value(double rho, std::size_t n) {
  if (n < 3) throw DataError("pearson p-value: need at least 3 samples");
  if (std::abs(rho) > 1.0) throw DataError("pearson p-value: |rho| > 1");
  if (std::abs(rho) == 1.0) return 0.0;
  const double dof = static_cast<double>(n - 2);
  // t^2 = rho^2 dof / (1 - rho^2), so dof / (dof + t^2) = 1 - rho^2 exactly.
  const double x = (1.0 - rho) * (1.0 + rho);
  return std::min(1.0, regularized_incomplete_beta(0.5 * dof, 0.5, x, rho * rho));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

FiveNumberSummary five_number_summary(std::vector<double> values) {
  if (values.empty()) throw DataError("five-number summary of an empty sample");
  std::sort(values.begin(), values.end());
  FiveNumberSummary s;
  s.n = values.size();
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = *std::lower_bound(values.begin(), values.end(), lo_fence);
  s.whisker_high = *(std::upper_bound(values.begin(), values.end(), hi_fence) - 1);
  return s;
}

}  // namespace patternscope
