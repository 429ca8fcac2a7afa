#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "meanrev/sdp.hpp"
#include "oracles.hpp"

using namespace meanrev;

namespace {

Matrix outer(const Vector& v) { return v * v.transpose(); }

// Sorted-breakpoint simplex projection written out independently.
Vector simplex_oracle(const Vector& v) {
  const Index n = v.size();
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((v.array() - mid).cwiseMax(0.0).sum() > 1.0) lo = mid; else hi = mid;
  }
  (void)n;
  return (v.array() - 0.5 * (lo + hi)).cwiseMax(0.0);
}

void expect_feasible(const SdpProblem& prob, const Matrix& y) {
  EXPECT_NEAR(y.trace(), 1.0, 1e-8);
  EXPECT_GE(oracle::lambda_min(y), -1e-8);
  EXPECT_GE(trace_product(prob.variance_matrix(), y), prob.variance_floor() - 1e-6);
  EXPECT_LE((y - y.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace

TEST(Projections, SimplexMatchesBisection) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Vector v = 2.0 * oracle::random_vector(6, gen);
    const Vector p = project_simplex(v);
    EXPECT_LE((p - simplex_oracle(v)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  }
  Vector v(3);
  v << 0.2, 0.2, 0.2;
  EXPECT_LE((project_simplex(v) - Vector::Constant(3, 1.0 / 3.0)).norm(), 1e-15);
}

TEST(Projections, PsdClipsNegativeEigenvalues) {
  std::mt19937_64 gen(2);
  const Matrix s = oracle::random_symmetric(5, gen);
  const oracle::Eig e = oracle::jacobi(s);
  const Matrix expect = e.vectors * e.values.cwiseMax(0.0).asDiagonal() * e.vectors.transpose();
  EXPECT_LE((project_psd(s) - expect).cwiseAbs().maxCoeff(), 1e-10);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -1;
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = 3;
  EXPECT_LE((project_psd(d) - want).norm(), 1e-15);
}

TEST(Projections, SpectahedronProjectsEigenvaluesOntoSimplex) {
  std::mt19937_64 gen(3);
  const Matrix s = oracle::random_symmetric(4, gen);
  const oracle::Eig e = oracle::jacobi(s);
  const Matrix expect = e.vectors * simplex_oracle(e.values).asDiagonal() * e.vectors.transpose();
  const Matrix p = project_spectahedron(s);
  EXPECT_LE((p - expect).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(p.trace(), 1.0, 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 1;
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = 1;
  EXPECT_LE((project_spectahedron(d) - want).norm(), 1e-15);
}

TEST(Sdp, UnconstrainedLinearGivesSmallestEigenvector) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix l = oracle::random_symmetric(3, gen);
    const SdpProblem prob(l, {}, 0.0, 0.0, Matrix::Identity(3, 3), 0.0);
    const SdpSolution sol = solve(prob);
    const oracle::Eig e = oracle::jacobi(l);
    EXPECT_TRUE(sol.converged);
    EXPECT_NEAR(sol.objective, e.values(0), 1e-6);
    EXPECT_LE((sol.y - outer(e.vectors.col(0))).cwiseAbs().maxCoeff(), 1e-6 / (e.values(1) - e.values(0)) + 1e-6);
  }
}

TEST(Sdp, OneDimensionalProblem) {
  const SdpProblem prob(Matrix::Constant(1, 1, -2.0), {}, 0.0, 0.5, Matrix::Constant(1, 1, 3.0), 1.0);
  const SdpSolution sol = solve(prob);
  EXPECT_EQ(sol.y(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(sol.objective, -1.5);
}

TEST(Sdp, TwoByTwoAgainstAngleGrid) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix l = oracle::random_symmetric(2, gen);
    const Matrix b = oracle::random_psd(2, gen);
    // a floor midway between the eigenvalues of B keeps it active most of the time
    const oracle::Eig eb = oracle::jacobi(b);
    const double nu = 0.5 * (eb.values(0) + eb.values(1));
    const int grid = 1000000;
    double best = 1e300;
    for (int i = 0; i < grid; ++i) {
      const double th = std::acos(-1.0) * i / grid;
      Vector y(2);
      y << std::cos(th), std::sin(th);
      if (y.dot(b * y) >= nu) best = std::min(best, y.dot(l * y));
    }
    const SdpSolution sol = solve(SdpProblem(l, {}, 0.0, 0.0, b, nu));
    EXPECT_NEAR(sol.objective, best, 1e-4);
  }
}

TEST(Sdp, FloorConstrainedLinearMatchesDualOracle) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    const Matrix a0 = oracle::random_psd(n, gen);
    const Matrix a1 = 0.5 * oracle::random_symmetric(n, gen);
    const AutocovarianceSet acs({a0, a1}, 100);
    const SdpProblem prob = make_sdp1(acs, 0.0, 0.0);
    const Matrix m = prob.linear();
    // floor above the variance of the unconstrained minimizer
    const Vector v = oracle::jacobi(m).vectors.col(0);
    const double nu = 0.5 * (v.dot(a0 * v) + oracle::lambda_max(a0));
    const SdpSolution sol = solve(make_sdp1(acs, 0.0, nu));
    const double want = oracle::min_quadratic_with_floor(m, a0, nu);
    EXPECT_NEAR(sol.objective, want, 1e-5 * std::max(1.0, std::abs(want))) << "trial " << trial;
    expect_feasible(prob, sol.y);
  }
}

TEST(Sdp, ObjectiveTraceIsMonotone) {
  std::mt19937_64 gen(7);
  const Matrix a0 = oracle::random_psd(6, gen);
  std::vector<Matrix> mats{a0};
  for (int i = 0; i < 3; ++i) mats.push_back(0.4 * oracle::random_symmetric(6, gen));
  const AutocovarianceSet acs(mats, 100);
  const SdpSolution sol = solve(make_sdp3(acs, 3, 0.7, 0.01, 0.3 * a0.trace() / 6));
  ASSERT_FALSE(sol.objective_trace.empty());
  for (std::size_t i = 1; i < sol.objective_trace.size(); ++i) {
    EXPECT_LE(sol.objective_trace[i], sol.objective_trace[i - 1]);
  }
}

TEST(Sdp, GradientMatchesCentralDifferences) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 4;
    std::vector<Matrix> quads;
    for (int i = 0; i < 3; ++i) quads.push_back(oracle::random_symmetric(n, gen));
    const SdpProblem prob(oracle::random_symmetric(n, gen), quads, 0.8, 0.0, oracle::random_psd(n, gen), 0.0);
    const Matrix y = oracle::random_psd(n, gen);
    const Matrix dir = oracle::random_symmetric(n, gen);
    const double h = 1e-5;
    const double fd = (prob.smooth(y + h * dir) - prob.smooth(y - h * dir)) / (2.0 * h);
    const double an = trace_product(prob.gradient(y), dir);
    EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Sdp, SolutionsAreFeasible) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 4 + trial % 3;
    const Matrix a0 = oracle::random_psd(n, gen);
    std::vector<Matrix> mats{a0};
    for (int i = 0; i < 3; ++i) mats.push_back(0.3 * oracle::random_symmetric(n, gen));
    const AutocovarianceSet acs(mats, 100);
    const double nu = (0.2 + 0.1 * trial) * oracle::lambda_max(a0);
    for (const SdpProblem& prob : {make_sdp1(acs, 0.02, nu), make_sdp2(acs, 3, 0.02, nu), make_sdp3(acs, 3, 1.0, 0.02, nu)}) {
      const SdpSolution sol = solve(prob);
      expect_feasible(prob, sol.y);
      EXPECT_LE(sol.feasibility_residual, 1e-6);
    }
  }
}

TEST(Sdp, RejectsBadInput) {
  std::mt19937_64 gen(10);
  const Matrix a0 = oracle::random_psd(3, gen);
  EXPECT_THROW(SdpProblem(Matrix::Zero(3, 3), {}, 0.0, 0.0, a0, 1.01 * oracle::lambda_max(a0)), InfeasibleError);
  Matrix asym = Matrix::Zero(3, 3);
  asym(0, 1) = 1.0;
  EXPECT_THROW(SdpProblem(asym, {}, 0.0, 0.0, a0, 0.0), std::invalid_argument);
  EXPECT_THROW(SdpProblem(Matrix::Zero(2, 2), {}, 0.0, 0.0, a0, 0.0), std::invalid_argument);
  EXPECT_THROW(SdpProblem(Matrix::Zero(3, 3), {}, 0.0, -1.0, a0, 0.0), std::invalid_argument);
}

TEST(Sdp, Deterministic) {
  std::mt19937_64 gen(11);
  const Matrix a0 = oracle::random_psd(5, gen);
  const AutocovarianceSet acs({a0, 0.3 * oracle::random_symmetric(5, gen), 0.3 * oracle::random_symmetric(5, gen)}, 100);
  const SdpSolution a = solve(make_sdp2(acs, 2, 0.01, 0.2 * a0.trace() / 5));
  const SdpSolution b = solve(make_sdp2(acs, 2, 0.01, 0.2 * a0.trace() / 5));
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Sdp, HeavierL1WeightShrinksL1Norm) {
  std::mt19937_64 gen(12);
  const Matrix a0 = oracle::random_psd(6, gen);
  const AutocovarianceSet acs({a0, 0.4 * oracle::random_symmetric(6, gen)}, 100);
  double prev = 1e300;
  for (double rho : {0.0, 0.05, 0.2, 1.0}) {
    const SdpSolution sol = solve(make_sdp3(acs, 1, 0.0, rho, 0.0));
    const double l1 = sol.y.cwiseAbs().sum();
    EXPECT_LE(l1, prev + 1e-5) << "rho " << rho;
    prev = l1;
  }
}
