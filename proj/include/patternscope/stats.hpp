// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "patternscope/error.hpp"

namespace patternscope {

/// Regularized incomplete beta I_x(a, b), with y = 1 - x passed separately so
/// callers that know y exactly avoid cancellation. Continued fraction
/// (modified Lentz), using the symmetry relation on the slowly converging side.
double regularized_incomplete_beta(double a, double b, double x, double y);
inline double regularized_incomplete_beta(double a, double b, double x) {
  return regularized_incomplete_beta(a, b, x, 1.0 - x);
}

/// Two-tailed P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_tailed(double t, double dof);

/// Two-tailed p-value of a Pearson coefficient over n samples (t test with
/// n - 2 degrees of freedom). |rho| = 1 gives exactly 0.
double pearson_p_value(double rho, std::size_t n);

struct CorrelationResult {
  double rho = 0;
  double p_value = 1;
  std::size_t n = 0;
};

/// Product-moment correlation over two equal-length Eigen expressions.
/// Throws DataError for n < 3, a length mismatch, or zero variance.
template <typename DerivedX, typename DerivedY>
CorrelationResult pearson(const Eigen::DenseBase<DerivedX>& xs, const Eigen::DenseBase<DerivedY>& ys) {
  if (xs.size() != ys.size()) throw DataError("pearson: length mismatch");
  const Eigen::Index n = xs.size();
  if (n < 3) throw DataError("pearson: need at least 3 samples");
  const Eigen::ArrayXd x = Eigen::ArrayXd::NullaryExpr(
      n, [&](Eigen::Index i) { return static_cast<double>(xs.derived().coeff(i)); });
  const Eigen::ArrayXd y = Eigen::ArrayXd::NullaryExpr(
      n, [&](Eigen::Index i) { return static_cast<double>(ys.derived().coeff(i)); });
  const Eigen::ArrayXd dx = x - x.mean();
  const Eigen::ArrayXd dy = y - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (!(sxx > 0) || !(syy > 0)) throw DataError("pearson: zero variance");
  double rho = (dx * dy).sum() / std::sqrt(sxx * syy);
  rho = std::clamp(rho, -1.0, 1.0);
  return {rho, pearson_p_value(rho, static_cast<std::size_t>(n)), static_cast<std::size_t>(n)};
}

inline CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
  using Map = Eigen::Map<const Eigen::ArrayXd>;
  if (xs.size() != ys.size()) throw DataError("pearson: length mismatch");
  return pearson(Map(xs.data(), static_cast<Eigen::Index>(xs.size())),
                 Map(ys.data(), static_cast<Eigen::Index>(ys.size())));
}

/// Linear-interpolation quantile of already sorted values (h = (n-1)q).
double quantile_sorted(std::span<const double> sorted, double q);

/// Box-plot summary with linear-interpolation quartiles. Whiskers are the most
/// extreme data points within 1.5 IQR of the quartiles.
struct FiveNumberSummary {
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double whisker_low = 0, whisker_high = 0;
};

FiveNumberSummary five_number_summary(std::vector<double> values);

}  // namespace patternscope
