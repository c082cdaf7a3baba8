#pragma once

// Test-only reference computations. Nothing here calls the routine it is
// used to check.

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "matfac/matfac.hpp"

namespace matfac::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.normal();
  return m;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return random_matrix(rows, cols, rng);
}

/// BᵀB + I for a random square B.
inline Matrix random_spd(std::size_t n, Rng& rng) {
  const Matrix b = random_matrix(n, n, rng);
  return matmul_tn(b, b) + Matrix::identity(n);
}

inline Matrix random_symmetric(std::size_t n, Rng& rng) { return symmetrize(random_matrix(n, n, rng)); }

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

/// Naive triple loop, independent of the library kernels.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

/// Gauss-Jordan inverse with partial pivoting (small, well-conditioned inputs).
inline Matrix gauss_jordan_inverse(Matrix a) {
  const std::size_t n = a.rows();
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(col, j), a(piv, j));
      std::swap(inv(col, j), inv(piv, j));
    }
    const double d = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

/// M (MᵀM)⁻¹ Mᵀ through an explicit Gauss-Jordan inverse.
inline Matrix projector_oracle(const Matrix& m) {
  const Matrix mt = m.transpose();
  return naive_matmul(naive_matmul(m, gauss_jordan_inverse(naive_matmul(mt, m))), mt);
}

/// (1/T) Σ ||X_t - R F_t rightᵀ||_F², evaluated directly.
inline double row_loss(const MatrixPanel& panel, const FactorPath& f, const Matrix& right, const Matrix& r) {
  double total = 0.0;
  for (std::size_t t = 0; t < panel.t_len(); ++t) {
    const Matrix fit = naive_matmul(naive_matmul(r, f[t]), right.transpose());
    total += frobenius_sq(panel[t] - fit);
  }
  return total / static_cast<double>(panel.t_len());
}

/// Polar retraction onto {R : RᵀR = p I}, via the Gauss-Jordan route:
/// Y (YᵀY)^{-1/2} with the inverse root from an eigendecomposition.
inline Matrix retract(const Matrix& y) {
  const Matrix g = matmul_tn(y, y);
  const SymEig e = sym_eig(g);
  Matrix root_inv(g.rows(), g.cols());
  for (std::size_t k = 0; k < e.values.size(); ++k)
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j)
        root_inv(i, j) += e.vectors(i, k) * e.vectors(j, k) / std::sqrt(e.values[k]);
  Matrix out = naive_matmul(y, root_inv);
  out *= std::sqrt(static_cast<double>(y.rows()));
  return out;
}

/// ||LᵀL / p - I||_F
inline double normalization_error(const Matrix& l) {
  Matrix g = matmul_tn(l, l);
  g *= 1.0 / static_cast<double>(l.rows());
  return frobenius_norm(g - Matrix::identity(l.cols()));
}

/// Stationarity residual ||(1/T) Σ X_t right F_tᵀ - R Θ / p1||_F of the
/// constrained row problem, divided by ||(1/T) Σ X_t right F_tᵀ||_F.
inline double row_stationarity_residual(const MatrixPanel& panel, const FactorPath& f, const Matrix& right,
                                        const Matrix& r) {
  Matrix moment(panel.p1, f.m1);
  for (std::size_t t = 0; t < panel.t_len(); ++t)
    moment += naive_matmul(naive_matmul(panel[t], right), f[t].transpose());
  const Matrix theta = lagrange_multiplier(moment, panel.p1, panel.t_len());
  Matrix lhs = moment;
  lhs *= 1.0 / static_cast<double>(panel.t_len());
  Matrix rhs = naive_matmul(r, theta);
  rhs *= 1.0 / static_cast<double>(panel.p1);
  return frobenius_norm(lhs - rhs) / frobenius_norm(lhs);
}

/// Random noiseless panel X_t = R F_t Cᵀ together with its truth.
struct NoiselessCase {
  MatrixPanel panel;
  SimulationTruth truth;
};

inline NoiselessCase noiseless_case(std::size_t t_len, std::size_t p1, std::size_t p2, std::size_t k1, std::size_t k2,
                                    std::uint64_t seed) {
  SimConfig cfg;
  cfg.t_len = t_len;
  cfg.p1 = p1;
  cfg.p2 = p2;
  cfg.k1 = k1;
  cfg.k2 = k2;
  cfg.seed = seed;
  cfg.burn_in = 20;
  SimulatedPanel sim = simulate_panel(cfg);
  return {signal_panel(sim.truth), std::move(sim.truth)};
}

/// Weights [L | extra] built from the true loadings plus bounded random
/// columns. They are independent of the noise and keep nu_min(H_i) of order
/// one, unlike Gaussian weights whose H_i shrink like p^{-1/2}.
inline Matrix loading_informed_weight(const Matrix& loading, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w(loading.rows(), m);
  for (std::size_t i = 0; i < loading.rows(); ++i)
    for (std::size_t j = 0; j < m; ++j) w(i, j) = j < loading.cols() ? loading(i, j) : rng.uniform(-1.0, 1.0);
  return w;
}

inline ProjectionPair loading_informed_weights(const SimulationTruth& truth, std::size_t m1, std::size_t m2,
                                               std::uint64_t seed) {
  return make_projection_pair(loading_informed_weight(truth.loadings.r, m1, derive_seed(seed, 1)),
                              loading_informed_weight(truth.loadings.c, m2, derive_seed(seed, 2)));
}

}  // namespace matfac::testing
