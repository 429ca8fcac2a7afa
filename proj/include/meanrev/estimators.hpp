#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meanrev/proxies.hpp"
#include "meanrev/sdp.hpp"
#include "meanrev/sparse_eig.hpp"

namespace meanrev {

enum class Estimator { pca, spca, box_tiao, predictability, portmanteau, crossing };

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::pca: return "pca";
    case Estimator::spca: return "spca";
    case Estimator::box_tiao: return "box_tiao";
    case Estimator::predictability: return "predictability";
    case Estimator::portmanteau: return "portmanteau";
    case Estimator::crossing: return "crossing";
  }
  return "unknown";
}

inline Estimator parse_estimator(std::string_view s) {
  for (Estimator e : {Estimator::pca, Estimator::spca, Estimator::box_tiao, Estimator::predictability,
                      Estimator::portmanteau, Estimator::crossing}) {
    if (s == to_string(e)) return e;
  }
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

inline bool is_relaxation(Estimator e) {
  return e == Estimator::predictability || e == Estimator::portmanteau || e == Estimator::crossing;
}

struct EstimatorParams {
  std::optional<int> k;
  double nu = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  int p = 1;
};

/// Proxy values achieved by a basket on the data it was estimated from.
struct BasketDiagnostics {
  double variance = 0.0;
  std::optional<double> predictability;
  std::optional<double> portmanteau;
  std::optional<double> crossing;  // lag-1 autocorrelation of the basket
};

struct BasketWeights {
  Vector y;
  std::vector<int> support;
  Estimator estimator = Estimator::pca;
  EstimatorParams params;
  BasketDiagnostics diagnostics;
};

namespace detail {

inline BasketWeights finish_basket(Vector y, Estimator e, EstimatorParams params, const AutocovarianceSet& acs) {
  y /= y.norm();
  canonicalize_sign(y);
  BasketWeights w;
  w.support = support_of(y);
  w.diagnostics.variance = y.dot(acs.a0() * y);
  if (acs.order() >= 1 && w.diagnostics.variance > 1e-14) {
    w.diagnostics.predictability = predictability(y, acs);
    w.diagnostics.portmanteau = portmanteau(y, acs, std::clamp(params.p, 1, acs.order()));
    w.diagnostics.crossing = y.dot(acs[1] * y) / w.diagnostics.variance;
  }
  w.y = std::move(y);
  w.estimator = e;
  w.params = params;
  return w;
}

}  // namespace detail

/// Dense eigenvector of A0 with the smallest eigenvalue.
inline BasketWeights estimate_pca(const AutocovarianceSet& acs) {
  const SymEig eig = sym_eig(acs.a0());
  return detail::finish_basket(eig.vectors.col(0), Estimator::pca, {}, acs);
}

/// k-sparse eigenvector of A0 with (approximately) smallest eigenvalue.
inline BasketWeights estimate_spca(const AutocovarianceSet& acs, int k, const SparseEigOptions& opt = {}) {
  EstimatorParams params;
  params.k = k;
  return detail::finish_basket(sparse_smallest_eigvec(acs.a0(), k, opt), Estimator::spca, params, acs);
}

/// Minimum-predictability basket A0^{-1/2} y0, y0 the smallest eigenvector of
/// A0^{-1/2} A1 A0^{-1} A1' A0^{-1/2}.
inline BasketWeights estimate_box_tiao(const AutocovarianceSet& acs) {
  if (acs.order() < 1) throw std::invalid_argument("Box-Tiao estimator needs A1");
  const Matrix w = ridge_inverse_sqrt(acs.a0());
  const Matrix m = acs[1] * ridge_inverse(acs.a0()) * acs[1].transpose();
  const SymEig eig = sym_eig(symmetrize(w * m * w));
  return detail::finish_basket(w * eig.vectors.col(0), Estimator::box_tiao, {}, acs);
}

/// Scale-free value of the criterion a relaxation estimator targets.
inline double criterion_value(Estimator e, const Vector& y, const AutocovarianceSet& acs, int p, double mu) {
  switch (e) {
    case Estimator::predictability: return predictability(y, acs);
    case Estimator::portmanteau: return portmanteau(y, acs, p);
    case Estimator::crossing: return crossing_objective(y, acs, p, mu);
    default: throw std::invalid_argument("criterion_value needs a relaxation estimator");
  }
}

inline SdpProblem make_relaxation(Estimator e, const AutocovarianceSet& acs, int p, double mu, double rho, double nu) {
  switch (e) {
    case Estimator::predictability: return make_sdp1(acs, rho, nu);
    case Estimator::portmanteau: return make_sdp2(acs, p, rho, nu);
    case Estimator::crossing: return make_sdp3(acs, p, mu, rho, nu);
    default: throw std::invalid_argument("no relaxation for estimator " + std::string(to_string(e)));
  }
}

/// Leading k-sparse eigenvector of a relaxed solution, as a basket.
inline BasketWeights deflate(Estimator e, const AutocovarianceSet& acs, const SdpSolution& sol, int k,
                             const EstimatorParams& params, const SparseEigOptions& opt = {}) {
  EstimatorParams pr = params;
  pr.k = k;
  return detail::finish_basket(sparse_leading_eigvec(sol.y, k, opt), e, pr, acs);
}

/// Relax, solve, deflate. nu is in absolute variance units.
inline BasketWeights estimate_basket(Estimator criterion, const AutocovarianceSet& acs, int k, double nu, double rho,
                                     double mu, int p, const SolverOptions& solver = {},
                                     const SparseEigOptions& sparse = {}) {
  if (!is_relaxation(criterion)) throw std::invalid_argument("estimate_basket needs a relaxation criterion");
  if (k < 1 || k > acs.dim()) throw std::invalid_argument("support size k must lie in [1, n]");
  const SdpSolution sol = solve(make_relaxation(criterion, acs, p, mu, rho, nu), solver);
  return deflate(criterion, acs, sol, k, {k, nu, rho, mu, p}, sparse);
}

/// Baskets for several sparsity targets from a grid of L1 weights. Each rho
/// is solved once; for each k the candidate with the best criterion value
/// among those meeting the variance floor wins (all candidates if none does).
inline std::vector<BasketWeights> estimate_basket_family(Estimator criterion, const AutocovarianceSet& acs,
                                                         const std::vector<int>& ks, double nu,
                                                         const std::vector<double>& rho_grid, double mu, int p,
                                                         const SolverOptions& solver = {},
                                                         const SparseEigOptions& sparse = {}) {
  if (!is_relaxation(criterion)) throw std::invalid_argument("estimate_basket_family needs a relaxation criterion");
  if (rho_grid.empty()) throw std::invalid_argument("rho grid must not be empty");
  for (int k : ks) {
    if (k < 1 || k > acs.dim()) throw std::invalid_argument("support size k must lie in [1, n]");
  }
  std::vector<SdpSolution> sols;
  for (double rho : rho_grid) sols.push_back(solve(make_relaxation(criterion, acs, p, mu, rho, nu), solver));

  std::vector<BasketWeights> out;
  for (int k : ks) {
    std::optional<BasketWeights> best;
    double best_value = std::numeric_limits<double>::infinity();
    bool best_feasible = false;
    for (std::size_t r = 0; r < rho_grid.size(); ++r) {
      BasketWeights w = deflate(criterion, acs, sols[r], k, {k, nu, rho_grid[r], mu, p}, sparse);
      if (!(w.diagnostics.variance > 1e-14)) continue;
      const bool feasible = w.diagnostics.variance >= nu * (1.0 - 1e-6);
      const double value = criterion_value(criterion, w.y, acs, p, mu);
      if (!best || (feasible && !best_feasible) || (feasible == best_feasible && value < best_value)) {
        best = std::move(w);
        best_value = value;
        best_feasible = feasible;
      }
    }
    if (!best) throw DegenerateError("every deflated basket has zero variance");
    out.push_back(std::move(*best));
  }
  return out;
}

}  // namespace meanrev
