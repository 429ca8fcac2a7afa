#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "meanrev/errors.hpp"

namespace meanrev {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigenvalues in ascending order with matching eigenvector columns.
struct SymEig {
  Vector values;
  Matrix vectors;
};

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline SymEig sym_eig(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) {
    throw DegenerateError("symmetric eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double lambda_min(const Matrix& s) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

inline double lambda_max(const Matrix& s) {
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues();
  return ev(ev.size() - 1);
}

/// Ridge used wherever A0 has to be inverted: delta = 1e-8 * trace(A0) / n.
inline double ridge_delta(const Matrix& a0) {
  return 1e-8 * a0.trace() / static_cast<double>(a0.rows());
}

/// (A0 + delta I)^{-1}.
inline Matrix ridge_inverse(const Matrix& a0) {
  const Index n = a0.rows();
  Matrix reg = a0 + ridge_delta(a0) * Matrix::Identity(n, n);
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success) {
    throw DegenerateError("covariance matrix is singular beyond ridge regularization");
  }
  return symmetrize(llt.solve(Matrix::Identity(n, n)));
}

/// (A0 + delta I)^{-1/2} through the eigendecomposition.
inline Matrix ridge_inverse_sqrt(const Matrix& a0) {
  const Index n = a0.rows();
  const SymEig eig = sym_eig(a0 + ridge_delta(a0) * Matrix::Identity(n, n));
  if (!(eig.values(0) > 0.0)) {
    throw DegenerateError("covariance matrix is singular beyond ridge regularization");
  }
  const Vector inv_sqrt = eig.values.array().rsqrt();
  return symmetrize(eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose());
}

/// Flips the sign so that the first nonzero coordinate is positive.
inline void canonicalize_sign(Vector& y) {
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0) {
      if (y(i) < 0.0) y = (-y).array() + 0.0;  // + 0.0 turns -0 into 0
      return;
    }
  }
}

inline std::vector<int> support_of(const Vector& y) {
  std::vector<int> s;
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0) s.push_back(static_cast<int>(i));
  }
  return s;
}

inline Matrix principal_submatrix(const Matrix& a, const std::vector<int>& idx) {
  const auto m = static_cast<Index>(idx.size());
  Matrix out(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) out(i, j) = a(idx[i], idx[j]);
  }
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace meanrev
