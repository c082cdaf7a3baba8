#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "matfac/metrics.hpp"
#include "matfac/simulate.hpp"
#include "oracles.hpp"

namespace matfac {
namespace {

Matrix random_orthogonal(std::size_t k, std::uint64_t seed) { return gram_schmidt(testing::random_matrix(k, k, seed)); }

TEST(SpaceDistance, KnownValues) {
  const Matrix e1{{1}, {0}, {0}};
  const Matrix e2{{0}, {1}, {0}};
  const Matrix e12{{1, 0}, {0, 1}, {0, 0}};
  EXPECT_NEAR(space_distance(e1, e1), 0.0, 1e-12);
  EXPECT_NEAR(space_distance(e1, e2), 1.0, 1e-12);
  EXPECT_NEAR(space_distance(e1, e12), std::sqrt(0.5), 1e-12);
  const Matrix diag{{1}, {1}, {0}};
  EXPECT_NEAR(space_distance(e1, diag), std::sqrt(0.5), 1e-12);
}

TEST(SpaceDistance, Axioms) {
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    const Matrix a = testing::random_matrix(10, 3, rng);
    const Matrix b = testing::random_matrix(10, 2, rng);
    const double d = space_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_NEAR(d, space_distance(b, a), 1e-12);
    EXPECT_LE(space_distance(a, a), 1e-7);
    Matrix mixed = a * testing::random_matrix(3, 3, rng);
    EXPECT_LE(space_distance(a, mixed), 1e-6);
  }
}

TEST(SpaceDistance, SignFlipInvariant) {
  const Matrix a = testing::random_matrix(8, 3, 3);
  Matrix b = a;
  for (std::size_t i = 0; i < 8; ++i) b(i, 1) = -b(i, 1);
  EXPECT_LE(space_distance(a, b), 1e-7);
}

TEST(SpaceDistance, Errors) {
  try {
    space_distance(Matrix{{1, 2}, {2, 4}}, Matrix{{1}, {0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
  try {
    space_distance(Matrix(3, 1, 1.0), Matrix(4, 1, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimMismatch);
  }
}

TEST(VecFactorDistance, InvariantToInvertibleTransform) {
  SimConfig cfg;
  cfg.t_len = 30;
  cfg.seed = 9;
  const SimulatedPanel s = simulate_panel(cfg);
  EXPECT_LE(vec_factor_distance(s.truth.factors, s.truth.factors), 1e-7);
  // vec(A F Bᵀ) = (B ⊗ A) vec F, an invertible 9x9 map of the stacked rows.
  const Matrix a = testing::random_matrix(3, 3, 10) + 3.0 * Matrix::identity(3);
  const Matrix b = testing::random_matrix(3, 3, 11) + 3.0 * Matrix::identity(3);
  FactorPath moved = s.truth.factors;
  for (Matrix& f : moved.slices) f = testing::naive_matmul(testing::naive_matmul(a, f), b.transpose());
  EXPECT_LE(vec_factor_distance(moved, s.truth.factors), 1e-6);
}

TEST(ReplicationSummary, Values) {
  const std::vector<double> ones{1, 1, 1};
  Summary s = replication_summary(ones);
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_DOUBLE_EQ(s.sd, 0.0);
  const std::vector<double> pair{0, 2};
  s = replication_summary(pair);
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_NEAR(s.sd, std::sqrt(2.0), 1e-15);
  const std::vector<double> single{4.5};
  s = replication_summary(single);
  EXPECT_DOUBLE_EQ(s.mean, 4.5);
  EXPECT_DOUBLE_EQ(s.sd, 0.0);
  EXPECT_THROW(replication_summary(std::vector<double>{}), Error);
}

TEST(ReplicationSummary, MatchesBruteForce) {
  Rng rng(12);
  std::vector<double> v(1000);
  for (double& x : v) x = 5.0 + rng.normal();
  // Sum of pairwise squared differences equals 2 n² var_pop.
  long double mean = 0.0L;
  for (double x : v) mean += x;
  mean /= 1000.0L;
  long double pairs = 0.0L;
  for (double x : v)
    for (double y : v) pairs += static_cast<long double>(x - y) * (x - y);
  const double sd = static_cast<double>(std::sqrt(pairs / (2.0L * 1000.0L * 999.0L)));
  const Summary s = replication_summary(v);
  EXPECT_NEAR(s.mean, static_cast<double>(mean), 1e-12);
  EXPECT_NEAR(s.sd, sd, 1e-10);
}

MatrixPanel panel_of(std::vector<Matrix> slices) {
  const std::size_t r = slices.front().rows(), c = slices.front().cols();
  return MatrixPanel(r, c, std::move(slices));
}

TEST(RollingStats, HandCase) {
  const MatrixPanel y = panel_of({Matrix{{1, 2}, {3, 4}}, Matrix{{2, 0}, {1, 1}}});
  const MatrixPanel f = panel_of({Matrix{{1, 1}, {3, 3}}, Matrix{{2, 1}, {0, 1}}});
  const RollingStats s = rolling_stats(y, f);
  EXPECT_NEAR(s.mse, 0.5, 1e-15);
  EXPECT_NEAR(s.rho, 4.0 / 9.0, 1e-15);
}

TEST(RollingStats, MeanForecastHasUnitRatio) {
  SimConfig cfg;
  cfg.t_len = 12;
  cfg.seed = 13;
  const SimulatedPanel sim = simulate_panel(cfg);
  Matrix mean(20, 20);
  for (const Matrix& m : sim.panel.slices) mean += m;
  mean *= 1.0 / 12.0;
  const MatrixPanel fitted(20, 20, std::vector<Matrix>(12, mean));
  EXPECT_NEAR(rolling_stats(sim.panel, fitted).rho, 1.0, 1e-12);

  const MatrixPanel signal = signal_panel(sim.truth);
  double noise = 0.0;
  for (const Matrix& e : sim.truth.noise.slices) noise += frobenius_sq(e);
  EXPECT_NEAR(rolling_stats(sim.panel, signal).mse, noise / (12.0 * 400.0), 1e-12);
}

TEST(RollingStats, Errors) {
  const MatrixPanel y = panel_of({Matrix{{1, 2}}, Matrix{{1, 2}}});
  try {
    rolling_stats(y, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDenominator);
  }
  try {
    rolling_stats(y, panel_of({Matrix{{1, 2}}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimMismatch);
  }
  try {
    rolling_stats(MatrixPanel(1, 2, {}), MatrixPanel(1, 2, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Empty);
  }
}

TEST(LoadingVariation, Values) {
  const LoadingPair a{testing::random_matrix(40, 2, 1), testing::random_matrix(40, 2, 2)};
  EXPECT_LE(loading_variation(a, a), 1e-7);
  const LoadingPair rot{a.r * random_orthogonal(2, 3), a.c * random_orthogonal(2, 4)};
  EXPECT_LE(loading_variation(rot, a), 1e-6);
  const LoadingPair b{testing::random_matrix(40, 2, 5), testing::random_matrix(40, 2, 6)};
  const double v = loading_variation(a, b);
  EXPECT_GT(v, 0.0);
  EXPECT_LE(v, 1.0);
  const LoadingPair small{testing::random_matrix(30, 2, 7), a.c};
  EXPECT_THROW(loading_variation(a, small), Error);
}

}  // namespace
}  // namespace matfac
