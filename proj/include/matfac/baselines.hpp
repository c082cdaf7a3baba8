#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>

#include "matfac/error.hpp"
#include "matfac/factor_projection.hpp"
#include "matfac/linalg.hpp"
#include "matfac/types.hpp"

namespace matfac {

namespace detail {

// sqrt(p) times the top-k eigenvectors of a PSD matrix.
inline Matrix scaled_top_eigenvectors(const Matrix& m, std::size_t k, const char* which) {
  const SymEig e = sym_eig(m);
  const double lmax = e.values.front();
  if (!(lmax > 0.0) || !(e.values[k - 1] > kDefaultRelFloor * lmax))
    throw RankDeficientError(1, std::string("alpha-PCA ") + which + ": eigenvalue " + std::to_string(k) +
                                    " is not above the floor");
  Matrix out = e.vectors.left_cols(k);
  out *= std::sqrt(static_cast<double>(m.rows()));
  return out;
}

}  // namespace detail

/// alpha-PCA with alpha = 0: loadings from the leading eigenvectors of the
/// averaged row and column second-moment matrices, factors by re-projection.
inline FitResult alpha_pca_fit(const MatrixPanel& panel, std::size_t k1, std::size_t k2) {
  const auto start = std::chrono::steady_clock::now();
  validate_panel(panel);
  if (k1 < 1 || k2 < 1 || k1 > panel.p1 || k2 > panel.p2)
    throw Error(ErrorCode::BadDims, "alpha-PCA needs 1 <= k_i <= p_i");

  const double scale = 1.0 / (static_cast<double>(panel.t_len()) * static_cast<double>(panel.p1) *
                              static_cast<double>(panel.p2));
  Matrix m_row = pairwise_sum(0, panel.t_len(), [&](std::size_t t) { return matmul_nt(panel[t], panel[t]); });
  Matrix m_col = pairwise_sum(0, panel.t_len(), [&](std::size_t t) { return matmul_tn(panel[t], panel[t]); });
  m_row *= scale;
  m_col *= scale;

  FitResult fit;
  fit.loadings.r = detail::scaled_top_eigenvectors(m_row, k1, "row");
  fit.loadings.c = detail::scaled_top_eigenvectors(m_col, k2, "column");
  fit.factors = project_factors(panel, fit.loadings.r, fit.loadings.c);
  fit.iterations = 0;
  fit.converged = true;
  fit.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return fit;
}

/// Sum over columns of the variance of the squared loadings.
inline double varimax_criterion(const Matrix& loading) {
  const double p = static_cast<double>(loading.rows());
  double total = 0.0;
  for (std::size_t j = 0; j < loading.cols(); ++j) {
    double s2 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < loading.rows(); ++i) {
      const double sq = loading(i, j) * loading(i, j);
      s2 += sq;
      s4 += sq * sq;
    }
    total += s4 / p - (s2 / p) * (s2 / p);
  }
  return total;
}

struct VarimaxResult {
  Matrix rotated;
  Matrix rotation;  ///< orthogonal, rotated = loading * rotation
  std::size_t sweeps = 0;
  double max_last_angle = 0.0;
};

/// Raw varimax by Kaiser's pairwise plane rotations. A sweep visits every
/// column pair once; iteration stops after a sweep whose largest angle is below tol.
inline VarimaxResult varimax(const Matrix& loading, std::size_t max_sweeps = 100, double tol = 1e-10) {
  if (loading.cols() < 1) throw Error(ErrorCode::BadDims, "varimax needs at least one column");
  const std::size_t p = loading.rows();
  const std::size_t k = loading.cols();
  VarimaxResult res{loading, Matrix::identity(k), 0, 0.0};
  if (k == 1) return res;

  Matrix& l = res.rotated;
  Matrix& q = res.rotation;
  const double n = static_cast<double>(p);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_angle = 0.0;
    for (std::size_t a = 0; a + 1 < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) {
        double su = 0.0, sv = 0.0, suv2 = 0.0, suv = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
          const double x = l(i, a), y = l(i, b);
          const double u = x * x - y * y;
          const double v = 2.0 * x * y;
          su += u;
          sv += v;
          suv2 += u * u - v * v;
          suv += u * v;
        }
        const double num = 2.0 * suv - 2.0 * su * sv / n;
        const double den = suv2 - (su * su - sv * sv) / n;
        const double phi = 0.25 * std::atan2(num, den);
        max_angle = std::max(max_angle, std::abs(phi));
        if (std::abs(phi) < tol) continue;
        const double c = std::cos(phi), s = std::sin(phi);
        for (std::size_t i = 0; i < p; ++i) {
          const double x = l(i, a), y = l(i, b);
          l(i, a) = c * x + s * y;
          l(i, b) = -s * x + c * y;
        }
        for (std::size_t i = 0; i < k; ++i) {
          const double x = q(i, a), y = q(i, b);
          q(i, a) = c * x + s * y;
          q(i, b) = -s * x + c * y;
        }
      }
    res.sweeps = sweep + 1;
    res.max_last_angle = max_angle;
    if (max_angle < tol) break;
  }
  return res;
}

inline Matrix varimax_rotate(const Matrix& loading, std::size_t max_sweeps = 100, double tol = 1e-10) {
  return varimax(loading, max_sweeps, tol).rotated;
}

}  // namespace matfac
