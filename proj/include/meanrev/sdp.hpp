#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "meanrev/timeseries.hpp"

namespace meanrev {

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
inline Vector project_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
inline Matrix project_psd(const Matrix& s) {
  const SymEig eig = sym_eig(symmetrize(s));
  const Vector clipped = eig.values.cwiseMax(0.0);
  return symmetrize(eig.vectors * clipped.asDiagonal() * eig.vectors.transpose());
}

/// Frobenius-nearest point of {Y >= 0, Tr Y = 1}: eigenvalues projected onto the simplex.
inline Matrix project_spectahedron(const Matrix& s) {
  const SymEig eig = sym_eig(symmetrize(s));
  const Vector lam = project_simplex(eig.values);
  return symmetrize(eig.vectors * lam.asDiagonal() * eig.vectors.transpose());
}

inline double trace_product(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

/// minimize Tr(L Y) + mu * sum_i Tr(Q_i Y)^2 + rho * sum_ij |Y_ij|
/// subject to Tr(B Y) >= nu, Tr(Y) = 1, Y PSD.
class SdpProblem {
 public:
  SdpProblem(Matrix linear, std::vector<Matrix> quads, double quad_weight, double l1_weight,
             Matrix variance_matrix, double variance_floor)
      : linear_(std::move(linear)),
        quads_(std::move(quads)),
        quad_weight_(quad_weight),
        l1_weight_(l1_weight),
        variance_(std::move(variance_matrix)),
        floor_(variance_floor) {
    const Index n = variance_.rows();
    if (n < 1) throw std::invalid_argument("SDP dimension must be at least 1");
    auto check = [n](Matrix& m, const char* what) {
      if (m.rows() != n || m.cols() != n) throw std::invalid_argument(std::string(what) + " has wrong dimension");
      if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
      const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument(std::string(what) + " is not symmetric");
      }
      m = symmetrize(m);
    };
    check(variance_, "variance matrix");
    check(linear_, "linear term");
    for (Matrix& q : quads_) check(q, "quadratic term");
    if (!(quad_weight_ >= 0.0) || !(l1_weight_ >= 0.0) || !(floor_ >= 0.0)) {
      throw std::invalid_argument("SDP weights and variance floor must be non-negative");
    }
    max_variance_ = lambda_max(variance_);
    if (max_variance_ < floor_) {
      throw InfeasibleError("variance floor exceeds the largest eigenvalue of A0");
    }
  }

  Index dim() const { return variance_.rows(); }
  const Matrix& linear() const { return linear_; }
  const std::vector<Matrix>& quads() const { return quads_; }
  double quad_weight() const { return quad_weight_; }
  double l1_weight() const { return l1_weight_; }
  const Matrix& variance_matrix() const { return variance_; }
  double variance_floor() const { return floor_; }
  double max_variance() const { return max_variance_; }

  /// Smooth part Tr(L Y) + mu sum Tr(Q_i Y)^2.
  double smooth(const Matrix& y) const {
    double v = trace_product(linear_, y);
    for (const Matrix& q : quads_) {
      const double tq = trace_product(q, y);
      v += quad_weight_ * tq * tq;
    }
    return v;
  }

  /// L + 2 mu sum Tr(Q_i Y) Q_i.
  Matrix gradient(const Matrix& y) const {
    Matrix g = linear_;
    for (const Matrix& q : quads_) g += (2.0 * quad_weight_ * trace_product(q, y)) * q;
    return g;
  }

  double objective(const Matrix& y) const { return smooth(y) + l1_weight_ * y.cwiseAbs().sum(); }

  /// 2 mu sum ||Q_i||_F^2 bounds the curvature; ||L||_F is added as a floor
  /// so that purely linear problems still get a finite step.
  double lipschitz() const {
    double lip = linear_.norm();
    for (const Matrix& q : quads_) lip += 2.0 * quad_weight_ * q.squaredNorm();
    return lip > 0.0 ? lip : 1.0;
  }

 private:
  Matrix linear_;
  std::vector<Matrix> quads_;
  double quad_weight_;
  double l1_weight_;
  Matrix variance_;
  double floor_;
  double max_variance_ = 0.0;
};

/// Predictability relaxation: L = A1 A0^{-1} A1'.
inline SdpProblem make_sdp1(const AutocovarianceSet& acs, double rho, double nu) {
  if (acs.order() < 1) throw std::invalid_argument("predictability relaxation needs A1");
  const Matrix m = symmetrize(acs[1] * ridge_inverse(acs.a0()) * acs[1].transpose());
  return SdpProblem(m, {}, 0.0, rho, acs.a0(), nu);
}

/// Portmanteau relaxation: sum_{i=1..p} Tr(A_i Y)^2.
inline SdpProblem make_sdp2(const AutocovarianceSet& acs, int p, double rho, double nu) {
  if (p < 1 || p > acs.order()) throw std::invalid_argument("portmanteau order outside 1..acs.order()");
  std::vector<Matrix> quads(acs.mats().begin() + 1, acs.mats().begin() + 1 + p);
  return SdpProblem(Matrix::Zero(acs.dim(), acs.dim()), std::move(quads), 1.0, rho, acs.a0(), nu);
}

/// Crossing relaxation: Tr(A1 Y) + mu sum_{i=2..p} Tr(A_i Y)^2.
inline SdpProblem make_sdp3(const AutocovarianceSet& acs, int p, double mu, double rho, double nu) {
  if (p < 1 || p > acs.order()) throw std::invalid_argument("crossing order outside 1..acs.order()");
  std::vector<Matrix> quads(acs.mats().begin() + 2, acs.mats().begin() + 1 + p);
  return SdpProblem(acs[1], std::move(quads), mu, rho, acs.a0(), nu);
}

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 50000;
};

struct SdpSolution {
  Matrix y;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double feasibility_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // accepted objective after each outer iteration
};

namespace detail {

/// prox of t*rho*||.||_1 + indicator of C = spectahedron ∩ {Tr(BY) >= nu}.
/// P_C is exact: P_spect(Z + lambda B) with the scalar lambda >= 0 found by a
/// bracketed root search. For rho > 0 the L1 dual |U_ij| <= tau is maximized
/// by accelerated projected gradient with Y(U) = P_C(Z - U), so every inner
/// iterate is feasible. Multipliers persist between calls as a warm start;
/// one SdpProx must not be shared between threads.
class SdpProx {
 public:
  explicit SdpProx(const SdpProblem& prob) : prob_(prob) {
    const double bn = prob.variance_matrix().norm();
    bnorm_ = bn > 0.0 ? bn : 1.0;
    bhat_ = prob.variance_matrix() / bnorm_;
    nuhat_ = prob.variance_floor() / bnorm_;
    u_ = Matrix::Zero(prob.dim(), prob.dim());
  }

  /// Target duality gap of the inner problem (in squared Frobenius units).
  void set_gap_tolerance(double g) { gap_tol_ = g; }
  int inner_iterations() const { return inner_total_; }

  Matrix operator()(const Matrix& z, double t) const {
    const double tau = t * prob_.l1_weight();
    // optimal multipliers grow roughly in proportion to the step
    if (last_t_ > 0.0 && t != last_t_) {
      u_ *= t / last_t_;
      lam_ *= t / last_t_;
    }
    last_t_ = t;
    if (tau == 0.0) return project_feasible(z);
    return l1_prox(z, tau);
  }

  /// Exact projection onto spectahedron ∩ halfspace.
  Matrix project_feasible(const Matrix& z) const {
    const SymEig base = sym_eig(symmetrize(z));
    Matrix y = base.vectors * project_simplex(base.values).asDiagonal() * base.vectors.transpose();
    const double nu = nuhat_;
    if (nu <= 0.0 || trace_product(bhat_, y) >= nu) return symmetrize(y);

    auto at = [&](double lam) {
      const SymEig e = sym_eig(symmetrize(z + lam * bhat_));
      return (e.vectors * project_simplex(e.values).asDiagonal() * e.vectors.transpose()).eval();
    };
    auto f = [&](double lam) { return trace_product(bhat_, at(lam)) - nu; };
    double lo = 0.0;
    double flo = trace_product(bhat_, y) - nu;
    double hi = std::max(lam_ > 0.0 ? 2.0 * lam_ : 1.0, 1e-12);
    double fhi = f(hi);
    int guard = 0;
    while (fhi < 0.0) {
      lo = hi;
      flo = fhi;
      hi *= 4.0;
      fhi = f(hi);
      if (++guard > 200) throw InfeasibleError("variance floor unreachable on the spectahedron");
    }
    if (fhi > 0.0) {
      std::uintmax_t max_iter = 200;
      const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                       boost::math::tools::eps_tolerance<double>(46), max_iter);
      hi = r.second;
    }
    lam_ = hi;
    return symmetrize(at(hi));
  }

  /// Inner dual ascent for tau > 0 over the box |U_ij| <= tau, with
  /// Y(U) = P_C(Z - U) and gradient Y(U) (Lipschitz constant 1).
  Matrix l1_prox(const Matrix& z, double tau) const {
    auto clip = [tau](const Matrix& m) { return m.cwiseMax(-tau).cwiseMin(tau).eval(); };
    Matrix u = clip(u_);
    Matrix u_prev = u;
    Matrix uy = u;
    Matrix best_y;
    double best_gap = std::numeric_limits<double>::infinity();
    double prev_gap = best_gap;
    double theta = 1.0;
    for (int it = 0; it < kMaxInner; ++it) {
      ++inner_total_;
      const Matrix y = project_feasible(z - uy);
      const double gap = tau * y.cwiseAbs().sum() - trace_product(uy, y);
      if (gap < best_gap) {
        best_gap = gap;
        best_y = y;
        u_ = uy;
      }
      if (gap <= gap_tol_) break;
      const Matrix u_new = clip(uy + y);
      double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      if (gap > prev_gap) theta_new = theta = 1.0;  // adaptive restart
      prev_gap = gap;
      uy = clip(u_new + ((theta - 1.0) / theta_new) * (u_new - u_prev));
      u_prev = u_new;
      theta = theta_new;
    }
    return best_y;
  }

 private:
  static constexpr int kMaxInner = 5000;
  const SdpProblem& prob_;
  double bnorm_ = 1.0;
  Matrix bhat_;
  double nuhat_ = 0.0;
  double gap_tol_ = 1e-12;
  mutable Matrix u_;
  mutable double lam_ = 0.0;
  mutable double last_t_ = 0.0;
  mutable int inner_total_ = 0;
};

// Gradient-mapping norm ||Y - prox_t(Y - t grad f(Y))|| at the reference step t = 1 / Lip.
inline double kkt_residual(const SdpProblem& prob, const SdpProx& prox, const Matrix& y) {
  const double t = 1.0 / prob.lipschitz();
  return (y - prox(y - t * prob.gradient(y), t)).norm();
}

}  // namespace detail

/// Monotone accelerated proximal gradient (MFISTA) on the smooth part, with
/// the L1 penalty and all constraints handled inside the prox. The step
/// starts at 1 / Lip, is halved when sufficient decrease fails and doubled
/// after a clean step. A final convex combination with the top eigenvector
/// of B restores the variance floor if the inexact prox left it violated.
inline SdpSolution solve(const SdpProblem& prob, const SolverOptions& opt = {}) {
  const Index n = prob.dim();
  if (prob.max_variance() < prob.variance_floor()) {
    throw InfeasibleError("variance floor exceeds the largest eigenvalue of A0");
  }
  SdpSolution sol;
  if (n == 1) {
    sol.y = Matrix::Ones(1, 1);
    sol.objective = prob.objective(sol.y);
    sol.converged = true;
    sol.objective_trace.push_back(sol.objective);
    return sol;
  }

  const double lip = prob.lipschitz();
  const double t0 = 1.0 / lip;
  const double t_max = 1e4 * t0;
  double step = t0;
  detail::SdpProx prox(prob);
  auto gap_for = [&](double residual) { return std::max(1e-20, 1e-3 * std::pow(residual, 1.5)); };
  prox.set_gap_tolerance(gap_for(1.0));

  Matrix x = prox(Matrix::Identity(n, n) / static_cast<double>(n), step);
  double fx = prob.objective(x);
  Matrix yk = x;
  double theta = 1.0;

  for (int k = 1; k <= opt.max_iter; ++k) {
    sol.iterations = k;
    const Matrix g = prob.gradient(yk);
    const double fy = prob.smooth(yk);
    Matrix z;
    Matrix d;
    bool clean = true;
    while (true) {
      z = prox(yk - step * g, step);
      d = z - yk;
      const double bound = fy + trace_product(g, d) + d.squaredNorm() / (2.0 * step);
      if (prob.smooth(z) <= bound + 1e-12 * std::max(1.0, std::abs(fy)) || step <= t0) break;
      step = std::max(t0, 0.5 * step);
      clean = false;
    }
    const double fz = prob.objective(z);
    const double residual = d.norm() * t0 / step;

    Matrix x_new = fz <= fx ? z : x;
    const double fx_new = std::min(fz, fx);
    const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    yk = x_new + (theta / theta_new) * (z - x_new) + ((theta - 1.0) / theta_new) * (x_new - x);
    x = std::move(x_new);
    fx = fx_new;
    theta = theta_new;
    sol.objective_trace.push_back(fx);
    prox.set_gap_tolerance(gap_for(std::min(1.0, std::max(residual, opt.tol))));

    if (residual <= opt.tol) {
      if (detail::kkt_residual(prob, prox, x) <= opt.tol) {
        sol.converged = true;
        break;
      }
      yk = x;
      theta = 1.0;
    }
    if (clean) step = std::min(t_max, 2.0 * step);
  }

  const Matrix& b = prob.variance_matrix();
  const double nu = prob.variance_floor();
  const double achieved = trace_product(b, x);
  if (achieved < nu) {
    const SymEig eig = sym_eig(b);
    const Vector v = eig.vectors.col(n - 1);
    const double top = eig.values(n - 1);
    const double mix = top > achieved ? std::min(1.0, (nu - achieved) / (top - achieved)) : 1.0;
    x = (1.0 - mix) * x + mix * (v * v.transpose());
  }
  x = symmetrize(x);

  sol.y = x;
  sol.objective = prob.objective(x);
  sol.kkt_residual = detail::kkt_residual(prob, prox, x);
  sol.feasibility_residual = std::max(0.0, nu - trace_product(b, x)) + std::abs(x.trace() - 1.0) +
                             std::max(0.0, -lambda_min(x));
  return sol;
}

}  // namespace meanrev
