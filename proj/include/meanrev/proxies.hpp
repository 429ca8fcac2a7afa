#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "meanrev/timeseries.hpp"

namespace meanrev {

/// AR(1) parameters of a univariate series: x_t - mean = coeff (x_{t-1} - mean) + noise.
struct Ar1Fit {
  double mean = 0.0;
  double coeff = 0.0;
  double noise_sd = 0.0;
};

namespace detail {

inline double checked_variance(const Vector& y, const Matrix& a0) {
  const double var = y.dot(a0 * y);
  if (!(var > 1e-14 * y.squaredNorm())) {
    throw DegenerateError("basket has degenerate variance y'A0y");
  }
  return var;
}

}  // namespace detail

/// Box-Tiao predictability with the Yule-Walker plug-in:
/// y'A1 A0^{-1} A1'y / y'A0y.
inline double predictability(const Vector& y, const AutocovarianceSet& acs) {
  if (acs.order() < 1) throw std::invalid_argument("predictability needs at least one lag");
  const double var = detail::checked_variance(y, acs.a0());
  const Vector a1y = acs[1].transpose() * y;
  const double num = a1y.dot(ridge_inverse(acs.a0()) * a1y);
  return std::max(0.0, num) / var;
}

/// Mean of squared autocorrelations of y'x up to lag p.
inline double portmanteau(const Vector& y, const AutocovarianceSet& acs, int p) {
  if (p < 1 || p > acs.order()) throw std::invalid_argument("portmanteau order outside 1..acs.order()");
  const double var = detail::checked_variance(y, acs.a0());
  double sum = 0.0;
  for (int i = 1; i <= p; ++i) {
    const double r = y.dot(acs[i] * y) / var;
    sum += r * r;
  }
  return sum / p;
}

/// Scale-free crossing criterion: lag-1 autocorrelation plus mu times the
/// squared autocorrelations at lags 2..p.
inline double crossing_objective(const Vector& y, const AutocovarianceSet& acs, int p, double mu) {
  if (p < 1 || p > acs.order()) throw std::invalid_argument("crossing order outside 1..acs.order()");
  const double var = detail::checked_variance(y, acs.a0());
  double value = y.dot(acs[1] * y) / var;
  for (int i = 2; i <= p; ++i) {
    const double r = y.dot(acs[i] * y) / var;
    value += mu * r * r;
  }
  return value;
}

/// Fraction of adjacent pairs with x_t x_{t-1} <= 0. Zeros count as crossings.
inline double crossing_rate(std::span<const double> series) {
  if (series.size() < 2) throw std::invalid_argument("crossing rate needs at least 2 observations");
  std::size_t crossings = 0;
  for (std::size_t t = 1; t < series.size(); ++t) {
    if (series[t] * series[t - 1] <= 0.0) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(series.size() - 1);
}

/// Cosine formula arccos(a)/pi for a stationary AR(1).
inline double cosine_crossing(double a) {
  if (!(std::abs(a) < 1.0)) throw std::invalid_argument("AR coefficient must satisfy |a| < 1");
  return std::acos(a) / std::numbers::pi;
}

/// Scalar Yule-Walker AR(1) fit; the coefficient is clamped to [-0.999, 0.999].
inline Ar1Fit fit_ar1(std::span<const double> series) {
  const std::size_t t = series.size();
  if (t < 10) throw std::invalid_argument("AR(1) fit needs at least 10 observations");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(t);

  double c0 = 0.0;
  double c1 = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    const double d = series[i] - mean;
    c0 += d * d;
    if (i > 0) c1 += d * (series[i - 1] - mean);
  }
  if (!(c0 > 1e-24 * static_cast<double>(t) * std::max(1.0, mean * mean))) {
    throw DegenerateError("AR(1) fit on a series with zero variance");
  }
  const double a = std::clamp(c1 / c0, -0.999, 0.999);

  const std::size_t m = t - 1;
  double rmean = 0.0;
  for (std::size_t i = 1; i < t; ++i) rmean += (series[i] - mean) - a * (series[i - 1] - mean);
  rmean /= static_cast<double>(m);
  double rss = 0.0;
  for (std::size_t i = 1; i < t; ++i) {
    const double e = (series[i] - mean) - a * (series[i - 1] - mean) - rmean;
    rss += e * e;
  }
  return {mean, a, std::sqrt(rss / static_cast<double>(m - 1))};
}

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace meanrev
