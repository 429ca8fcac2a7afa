#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "meanrev/linalg.hpp"
#include "meanrev/philox.hpp"

namespace meanrev {

struct SparseEigOptions {
  int restarts = 20;
  std::uint64_t seed = 0;
  int max_iter = 1000;
  double tol = 1e-10;
};

namespace detail {

/// Indices of the k largest |v_i|, ascending; ties go to the lower index.
inline std::vector<int> top_k_support(const Vector& v, int k) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&v](int a, int b) { return std::abs(v(a)) > std::abs(v(b)); });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Vector truncate(const Vector& v, const std::vector<int>& support) {
  Vector out = Vector::Zero(v.size());
  for (int i : support) out(i) = v(i);
  return out;
}

/// Leading eigenvector of S restricted to `support`, embedded in R^n.
inline Vector restricted_leading(const Matrix& s, const std::vector<int>& support) {
  const SymEig eig = sym_eig(principal_submatrix(s, support));
  const Vector sub = eig.vectors.col(eig.vectors.cols() - 1);
  Vector out = Vector::Zero(s.rows());
  for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = sub(static_cast<Index>(i));
  return out;
}

struct Candidate {
  Vector y;
  double rayleigh = 0.0;
  std::vector<int> support;
};

inline Candidate make_candidate(const Matrix& s, Vector y) {
  y /= y.norm();
  canonicalize_sign(y);
  Candidate c;
  c.rayleigh = y.dot(s * y);
  c.support = support_of(y);
  c.y = std::move(y);
  return c;
}

// Larger Rayleigh quotient wins; near-ties go to the lexicographically smaller support.
inline bool better(const Candidate& a, const Candidate& b) {
  const double eps = 1e-12 * std::max(1.0, std::abs(b.rayleigh));
  if (a.rayleigh > b.rayleigh + eps) return true;
  if (a.rayleigh < b.rayleigh - eps) return false;
  return a.support < b.support;
}

/// y <- normalize(truncate_k(S y)) until the iterate stops moving, then the
/// final support is polished with an exact restricted eigen-solve.
inline Candidate truncated_power(const Matrix& s, const Matrix& shifted, Vector y, int k, const SparseEigOptions& opt) {
  y = truncate(y, top_k_support(y, k));
  y /= y.norm();
  for (int it = 0; it < opt.max_iter; ++it) {
    Vector next = shifted * y;
    next = truncate(next, top_k_support(next, k));
    const double norm = next.norm();
    if (norm == 0.0) break;
    next /= norm;
    const double diff = std::min((next - y).norm(), (next + y).norm());
    y = std::move(next);
    if (diff < opt.tol) break;
  }
  const std::vector<int> support = top_k_support(y, k);
  return make_candidate(s, restricted_leading(s, support));
}

/// Best-improvement single swaps (one index out, one in) with exact
/// restricted eigen-solves, until no swap raises the Rayleigh quotient.
inline Candidate swap_refine(const Matrix& s, Candidate best, int max_rounds = 100) {
  const Index n = s.rows();
  for (int round = 0; round < max_rounds; ++round) {
    Candidate next = best;
    bool moved = false;
    for (std::size_t r = 0; r < best.support.size(); ++r) {
      for (int j = 0; j < n; ++j) {
        if (std::binary_search(best.support.begin(), best.support.end(), j)) continue;
        std::vector<int> cand = best.support;
        cand[r] = j;
        std::sort(cand.begin(), cand.end());
        Candidate c = make_candidate(s, restricted_leading(s, cand));
        if (better(c, next)) {
          next = std::move(c);
          moved = true;
        }
      }
    }
    if (!moved) break;
    best = std::move(next);
  }
  return best;
}

}  // namespace detail

/// k-sparse unit vector approximately maximizing y'Sy (truncated power
/// method, best over several deterministic restarts).
inline Vector sparse_leading_eigvec(const Matrix& s_in, int k, const SparseEigOptions& opt = {}) {
  const Index n = s_in.rows();
  if (s_in.cols() != n || n < 1) throw std::invalid_argument("sparse eigenvector needs a square matrix");
  if (k < 1 || k > n) throw std::invalid_argument("support size k must lie in [1, n]");
  const Matrix s = symmetrize(s_in);
  const SymEig eig = sym_eig(s);

  // Power iteration needs a PSD operator; a multiple of I does not move the argmax.
  Matrix shifted = s;
  if (eig.values(0) < 0.0) shifted.diagonal().array() -= eig.values(0);

  const Vector dense = eig.vectors.col(n - 1);
  if (k == n) {
    Vector y = dense;
    canonicalize_sign(y);
    return y;
  }

  // Truncated dense eigenvector: the baseline every answer must beat.
  detail::Candidate best = detail::make_candidate(s, detail::truncate(dense, detail::top_k_support(dense, k)));
  auto consider = [&best](detail::Candidate c) {
    if (detail::better(c, best)) best = std::move(c);
  };
  consider(detail::truncated_power(s, shifted, dense, k, opt));

  Philox4x32 rng(opt.seed);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int r = 1; r < opt.restarts; ++r) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint32_t>(n - i)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    Vector start = Vector::Zero(n);
    for (int i = 0; i < k; ++i) start(perm[static_cast<std::size_t>(i)]) = 1.0;
    consider(detail::truncated_power(s, shifted, start, k, opt));
  }
  return detail::swap_refine(s, std::move(best)).y;
}

/// k-sparse unit vector approximately minimizing y'Sy, via the leading
/// sparse eigenvector of (lambda_max(S) + 1) I - S.
inline Vector sparse_smallest_eigvec(const Matrix& s, int k, const SparseEigOptions& opt = {}) {
  const Index n = s.rows();
  if (s.cols() != n || n < 1) throw std::invalid_argument("sparse eigenvector needs a square matrix");
  if (k < 1 || k > n) throw std::invalid_argument("support size k must lie in [1, n]");
  const Matrix sym = symmetrize(s);
  const double lam = lambda_max(sym) + 1.0;
  return sparse_leading_eigvec(lam * Matrix::Identity(n, n) - sym, k, opt);
}

}  // namespace meanrev
