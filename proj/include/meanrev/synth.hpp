#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "meanrev/philox.hpp"
#include "meanrev/timeseries.hpp"

namespace meanrev {

/// Cointegrated system x_t = level + Q s_t + eps_t where Q is a random
/// orthonormal basis, the first n_stationary latent coordinates of s are
/// AR(1) and the rest are random walks, and eps ~ N(0, noise_cov).
struct SynthSpec {
  int n = 1;
  int length = 100;
  int n_stationary = 0;
  std::vector<double> ar_coeffs;  // one per stationary coordinate
  Matrix noise_cov;               // n x n PSD; empty means zero noise
  std::uint64_t seed = 0;
  double innovation_sd = 1.0;
  double level = 0.0;
};

struct CointegratedSample {
  SamplePath path;
  std::vector<Vector> planted;  // unit-norm stationary directions
};

inline std::vector<double> gen_ar1(double a, double sigma, double mean, int length, std::uint64_t seed) {
  if (!(std::abs(a) < 1.0)) throw std::invalid_argument("AR coefficient must satisfy |a| < 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("AR noise scale must be positive");
  if (length < 1) throw std::invalid_argument("series length must be positive");
  Philox4x32 rng(seed);
  std::vector<double> out(static_cast<std::size_t>(length));
  double x = rng.gaussian() * sigma / std::sqrt(1.0 - a * a);
  out[0] = x + mean;
  for (std::size_t t = 1; t < out.size(); ++t) {
    x = a * x + sigma * rng.gaussian();
    out[t] = x + mean;
  }
  return out;
}

namespace detail {

// Draws n*n Gaussians row-major and orthonormalizes by Householder QR,
// with columns flipped so that diag(R) > 0.
inline Matrix random_orthonormal(int n, Philox4x32& rng) {
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

inline Matrix psd_sqrt(const Matrix& s) {
  const SymEig eig = sym_eig(symmetrize(s));
  const Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal();
}

}  // namespace detail

/// Draw order: n*n basis Gaussians; n initial latent draws; then per date
/// (latent innovations for t > 0, then n noise draws).
inline CointegratedSample gen_cointegrated(const SynthSpec& spec) {
  const int n = spec.n;
  if (n < 1 || spec.length < 3) throw std::invalid_argument("synthetic spec needs n >= 1 and length >= 3");
  if (spec.n_stationary < 0 || spec.n_stationary > n) {
    throw std::invalid_argument("n_stationary must lie in [0, n]");
  }
  if (static_cast<int>(spec.ar_coeffs.size()) != spec.n_stationary) {
    throw std::invalid_argument("need one AR coefficient per stationary direction");
  }
  for (double a : spec.ar_coeffs) {
    if (!(std::abs(a) < 1.0)) throw std::invalid_argument("AR coefficients must satisfy |a| < 1");
  }
  const bool noisy = spec.noise_cov.size() > 0;
  if (noisy && (spec.noise_cov.rows() != n || spec.noise_cov.cols() != n)) {
    throw std::invalid_argument("noise covariance must be n x n");
  }

  Philox4x32 rng(spec.seed);
  const Matrix q = detail::random_orthonormal(n, rng);
  const Matrix noise_root = noisy ? detail::psd_sqrt(spec.noise_cov) : Matrix::Zero(n, n);
  const double sd = spec.innovation_sd;

  Vector s(n);
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s(i) = i < spec.n_stationary ? sd * g / std::sqrt(1.0 - spec.ar_coeffs[i] * spec.ar_coeffs[i]) : sd * g;
  }
  Matrix x(spec.length, n);
  Vector z(n);
  for (int t = 0; t < spec.length; ++t) {
    if (t > 0) {
      for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        s(i) = i < spec.n_stationary ? spec.ar_coeffs[i] * s(i) + sd * g : s(i) + sd * g;
      }
    }
    for (int i = 0; i < n; ++i) z(i) = rng.gaussian();
    x.row(t) = (q * s + noise_root * z).transpose().array() + spec.level;
  }

  std::vector<Vector> planted;
  for (int i = 0; i < spec.n_stationary; ++i) planted.emplace_back(q.col(i));
  return {SamplePath(std::move(x)), std::move(planted)};
}

/// Several independent cointegrated pools side by side.
struct UniverseSpec {
  int pools = 10;
  int assets_per_pool = 10;
  int length = 255;
  std::vector<double> ar_coeffs{0.0, 0.3, 0.6};  // planted directions per pool
  double noise_sd = 0.5;
  double innovation_sd = 1.0;
  double level = 40.0;
  std::uint64_t seed = 1;
};

struct Universe {
  SamplePath path;
  std::vector<std::pair<std::string, std::string>> groups;  // asset_label, group_label
};

/// Pool i is generated with seed + i; labels are p<i>_a<j>.
inline Universe gen_universe(const UniverseSpec& u) {
  if (u.pools < 1 || u.assets_per_pool < 1) throw std::invalid_argument("universe needs pools and assets");
  const int n = u.assets_per_pool;
  Matrix values(u.length, static_cast<Index>(u.pools) * n);
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> groups;
  for (int p = 0; p < u.pools; ++p) {
    SynthSpec spec;
    spec.n = n;
    spec.length = u.length;
    spec.n_stationary = static_cast<int>(u.ar_coeffs.size());
    spec.ar_coeffs = u.ar_coeffs;
    spec.noise_cov = u.noise_sd * u.noise_sd * Matrix::Identity(n, n);
    spec.seed = u.seed + static_cast<std::uint64_t>(p);
    spec.innovation_sd = u.innovation_sd;
    spec.level = u.level;
    const CointegratedSample sample = gen_cointegrated(spec);
    values.middleCols(static_cast<Index>(p) * n, n) = sample.path.values();
    for (int j = 0; j < n; ++j) {
      labels.push_back(fmt::format("p{}_a{}", p, j));
      groups.emplace_back(labels.back(), fmt::format("pool{:02d}", p));
    }
  }
  return {SamplePath(std::move(values), std::move(labels)), std::move(groups)};
}

}  // namespace meanrev
