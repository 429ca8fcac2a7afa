#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "meanrev/philox.hpp"
#include "meanrev/timeseries.hpp"
#include "oracles.hpp"

using namespace meanrev;

namespace {

Matrix column(std::initializer_list<double> xs) {
  Matrix m(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

// Straight loop over the defining sum, no matrix algebra.
Matrix naive_autocov(const Matrix& x, int k) {
  const Index t = x.rows(), n = x.cols();
  Vector mean = Vector::Zero(n);
  for (Index s = 0; s < t; ++s) mean += x.row(s).transpose();
  mean /= static_cast<double>(t);
  Matrix a = Matrix::Zero(n, n);
  for (Index s = 0; s + k < t; ++s)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) a(i, j) += (x(s, i) - mean(i)) * (x(s + k, j) - mean(j));
  return a / static_cast<double>(t - k - 1);
}

Matrix random_path(Index t, Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix x(t, n);
  for (Index j = 0; j < n; ++j) {
    double level = 0.0;
    for (Index s = 0; s < t; ++s) x(s, j) = level += nd(gen);
  }
  return x;
}

}  // namespace

TEST(SamplePath, RejectsInvalidInput) {
  EXPECT_THROW(SamplePath(Matrix::Zero(2, 1)), std::invalid_argument);
  EXPECT_THROW(SamplePath(Matrix::Zero(3, 0)), std::invalid_argument);
  Matrix bad = Matrix::Zero(4, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(SamplePath{bad}, std::invalid_argument);
  EXPECT_THROW(SamplePath(Matrix::Zero(4, 2), {"a", "a"}), std::invalid_argument);
  EXPECT_THROW(SamplePath(Matrix::Zero(4, 2), {"a"}), std::invalid_argument);
  EXPECT_THROW(SamplePath(Matrix::Zero(4, 1), {"a"}, {"d1", "d2"}), std::invalid_argument);
}

TEST(SamplePath, RowsAndColumnsKeepLabels) {
  SamplePath p(random_path(10, 3, 1), {"a", "b", "c"});
  const SamplePath c = p.columns({2, 0});
  EXPECT_EQ(c.labels(), (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(c.values().col(0), p.values().col(2));
  const SamplePath r = p.rows(2, 5);
  EXPECT_EQ(r.length(), 5);
  EXPECT_EQ(r.values().row(0), p.values().row(2));
}

TEST(Center, ConstantPathBecomesZero) {
  Matrix x(5, 2);
  x.col(0).setConstant(3.5);
  x.col(1).setConstant(-2.0);
  EXPECT_EQ(center(SamplePath(x)).values(), Matrix::Zero(5, 2));
}

TEST(Center, TwoPointColumn) {
  Matrix x = column({1, 3, 2});
  // with a third point equal to the mean the first two map to -1, 1
  const Matrix c = center(SamplePath(x)).values();
  EXPECT_DOUBLE_EQ(c(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(2, 0), 0.0);
}

TEST(Center, ColumnMeansVanish) {
  const Matrix x = random_path(200, 4, 7);
  const Matrix c = center(SamplePath(x)).values();
  const double tol = 1e-10 * 200 * x.cwiseAbs().maxCoeff();
  for (Index j = 0; j < 4; ++j) EXPECT_NEAR(c.col(j).sum(), 0.0, tol);
}

TEST(Autocovariance, ScalarAlternatingFixture) {
  const SamplePath p(column({1, -1, 1, -1}));
  EXPECT_NEAR(autocovariance(p, 0)(0, 0), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(autocovariance(p, 1)(0, 0), -1.5, 1e-12);
  const AutocovarianceSet acs = build_autocov_set(p, 1);
  EXPECT_NEAR(acs[0](0, 0), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(acs[1](0, 0), -1.5, 1e-12);
}

TEST(Autocovariance, ConstantPathGivesZero) {
  Matrix x(6, 2);
  x.col(0).setConstant(1.0);
  x.col(1).setConstant(9.0);
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(autocovariance(SamplePath(x), k), Matrix::Zero(2, 2));
}

TEST(Autocovariance, LagTooLargeIsRejected) {
  const SamplePath p(random_path(6, 2, 3));
  EXPECT_NO_THROW(autocovariance(p, 3));
  EXPECT_THROW(autocovariance(p, 4), std::invalid_argument);
  EXPECT_THROW(autocovariance(p, -1), std::invalid_argument);
  EXPECT_THROW(build_autocov_set(p, 4), std::invalid_argument);
}

TEST(Autocovariance, MatchesNaiveSum) {
  const Matrix x = random_path(50, 4, 11);
  for (int k = 0; k <= 5; ++k) {
    const Matrix expect = naive_autocov(x, k);
    EXPECT_LE((autocovariance(SamplePath(x), k) - expect).cwiseAbs().maxCoeff(), 1e-10 * expect.cwiseAbs().maxCoeff());
  }
}

TEST(Autocovariance, IndependentColumnsAreUncorrelated) {
  const Index t = 20000;
  Philox4x32 rng(5);
  Matrix x(t, 2);
  for (Index s = 0; s < t; ++s) {
    x(s, 0) = rng.gaussian();
    x(s, 1) = rng.gaussian();
  }
  const Matrix a0 = autocovariance(SamplePath(x), 0);
  EXPECT_LE(std::abs(a0(0, 1)), 5.0 / std::sqrt(static_cast<double>(t)));
}

TEST(Autocovariance, LagZeroIsPsdBeforeSymmetrization) {
  const Matrix a0 = autocovariance(SamplePath(random_path(30, 6, 2)), 0);
  EXPECT_LE((a0 - a0.transpose()).cwiseAbs().maxCoeff(), 1e-12 * a0.cwiseAbs().maxCoeff());
  EXPECT_GE(oracle::lambda_min(0.5 * (a0 + a0.transpose())), -1e-10 * a0.trace());
}

TEST(AutocovarianceSet, StoresSymmetrizedMatrices) {
  const Matrix x = random_path(40, 3, 4);
  const AutocovarianceSet acs = build_autocov_set(SamplePath(x), 3);
  EXPECT_EQ(acs.order(), 3);
  EXPECT_EQ(acs.sample_size(), 40);
  for (int k = 0; k <= 3; ++k) {
    const Matrix raw = naive_autocov(x, k);
    const Matrix sym = 0.5 * (raw + raw.transpose());
    EXPECT_LE((acs[k] - sym).cwiseAbs().maxCoeff(), 1e-10 * sym.cwiseAbs().maxCoeff());
    EXPECT_EQ(acs[k], acs[k].transpose());
  }
}

TEST(AutocovarianceSet, SymmetricInputIsFixedPoint) {
  Matrix a0(2, 2), a1(2, 2);
  a0 << 2, 0.5, 0.5, 1;
  a1 << 0.3, 0.1, 0.1, -0.2;
  const AutocovarianceSet acs({a0, a1}, 10);
  EXPECT_EQ(acs[0], a0);
  EXPECT_EQ(acs[1], a1);
}

TEST(AutocovarianceSet, ClipsRoundingNoiseAndRejectsIndefinite) {
  Matrix a0(2, 2);
  a0 << 1, 1, 1, 1 - 1e-13;  // eigenvalue about -5e-14
  const AutocovarianceSet acs({a0}, 10);
  EXPECT_GE(oracle::lambda_min(acs.a0()), -1e-15);
  Matrix bad(2, 2);
  bad << 1, 0, 0, -0.1;
  EXPECT_THROW(AutocovarianceSet({bad}, 10), DegenerateError);
}

TEST(AutocovarianceSet, ShiftInvariantAndScaleEquivariant) {
  const Matrix x = random_path(80, 3, 9);
  Matrix shifted = x;
  shifted.rowwise() += Eigen::RowVector3d(5.0, -100.0, 0.25);
  const double s = 3.0;
  const AutocovarianceSet base = build_autocov_set(SamplePath(x), 2);
  const AutocovarianceSet moved = build_autocov_set(SamplePath(shifted), 2);
  const AutocovarianceSet scaled = build_autocov_set(SamplePath(Matrix(s * x)), 2);
  for (int k = 0; k <= 2; ++k) {
    const double ref = base[k].cwiseAbs().maxCoeff();
    EXPECT_LE((moved[k] - base[k]).cwiseAbs().maxCoeff(), 1e-9 * ref);
    EXPECT_LE((scaled[k] - s * s * base[k]).cwiseAbs().maxCoeff(), 1e-12 * s * s * ref);
  }
}

TEST(Autocovariance, YuleWalkerRecoversVarCoefficients) {
  // x_t = H x_{t-1} + e_t; raw A1 estimates Gamma0 H', so A0^{-1} A1 ~ H'.
  Matrix h(3, 3);
  h << 0.5, 0.2, 0.0, -0.1, 0.3, 0.1, 0.0, 0.2, -0.4;
  const Index t = 50000;
  Philox4x32 rng(17);
  Matrix x(t, 3);
  Vector cur = Vector::Zero(3);
  for (int burn = 0; burn < 200; ++burn) {
    Vector e(3);
    for (Index i = 0; i < 3; ++i) e(i) = rng.gaussian();
    cur = h * cur + e;
  }
  for (Index s = 0; s < t; ++s) {
    Vector e(3);
    for (Index i = 0; i < 3; ++i) e(i) = rng.gaussian();
    cur = h * cur + e;
    x.row(s) = cur.transpose();
  }
  const SamplePath p(x);
  const Matrix est = autocovariance(p, 0).ldlt().solve(autocovariance(p, 1));
  EXPECT_LE((est - h.transpose()).cwiseAbs().maxCoeff(), 10.0 / std::sqrt(static_cast<double>(t)));
}
