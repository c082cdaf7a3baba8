#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "matfac/error.hpp"
#include "matfac/factor_projection.hpp"
#include "matfac/linalg.hpp"
#include "matfac/types.hpp"

namespace matfac {

/// sqrt(1 - tr(Q1 Q1ᵀ Q2 Q2ᵀ) / max(q1, q2)) after orthonormalizing both inputs.
/// 0 for equal column spaces, 1 for orthogonal ones.
inline double space_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw Error(ErrorCode::DimMismatch, "space_distance: " + std::to_string(a.rows()) + " vs " +
                                            std::to_string(b.rows()) + " rows");
  const Matrix q1 = gram_schmidt(a);
  const Matrix q2 = gram_schmidt(b);
  // q - ||Q1ᵀQ2||² equals ||Q_big - Q_small Q_smallᵀ Q_big||², which keeps
  // full precision near zero distance.
  const Matrix& big = q1.cols() >= q2.cols() ? q1 : q2;
  const Matrix& small = q1.cols() >= q2.cols() ? q2 : q1;
  const Matrix resid = big - matmul(small, matmul_tn(small, big));
  const double q = static_cast<double>(big.cols());
  return std::sqrt(std::clamp(frobenius_sq(resid) / q, 0.0, 1.0));
}

/// Distance between span{vec F̂_t} and span{vec F_t}, both viewed as T-vectors:
/// the column spaces of the stacked T x (m1 m2) and T x (k1 k2) matrices.
inline double vec_factor_distance(const FactorPath& fhat, const FactorPath& truth) {
  if (fhat.t_len() != truth.t_len())
    throw Error(ErrorCode::DimMismatch, "vec_factor_distance: T = " + std::to_string(fhat.t_len()) + " vs " +
                                            std::to_string(truth.t_len()));
  return space_distance(stack_vec_rows(fhat), stack_vec_rows(truth));
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation, n - 1 denominator; 0 for a single value
};

inline Summary replication_summary(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::Empty, "replication_summary of no values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

struct RollingStats {
  double mse = 0.0;
  double rho = 0.0;
};

/// mse = Σ ||Ŷ - Y||² / (n p1 p2);  rho = Σ ||Ŷ - Y||² / Σ ||Y - Ȳ||²
inline RollingStats rolling_stats(const MatrixPanel& observed, const MatrixPanel& fitted) {
  if (observed.t_len() == 0) throw Error(ErrorCode::Empty, "rolling_stats needs at least one slice");
  if (observed.t_len() != fitted.t_len() || observed.p1 != fitted.p1 || observed.p2 != fitted.p2)
    throw Error(ErrorCode::DimMismatch, "observed and fitted windows differ in shape");
  const std::size_t n = observed.t_len();
  Matrix mean(observed.p1, observed.p2);
  for (const Matrix& y : observed.slices) mean += y;
  mean *= 1.0 / static_cast<double>(n);

  double err = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err += frobenius_sq(fitted[i] - observed[i]);
    total += frobenius_sq(observed[i] - mean);
  }
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateDenominator, "observed window is constant");
  const double cells = static_cast<double>(n) * static_cast<double>(observed.p1) * static_cast<double>(observed.p2);
  return {err / cells, err / total};
}

/// D(C_t ⊗ R_t, C_{t-1} ⊗ R_{t-1})
inline double loading_variation(const LoadingPair& curr, const LoadingPair& prev) {
  if (curr.r.rows() != prev.r.rows() || curr.c.rows() != prev.c.rows())
    throw Error(ErrorCode::DimMismatch, "loading_variation: loadings from windows of different dimensions");
  return space_distance(kron(curr.c, curr.r), kron(prev.c, prev.r));
}

}  // namespace matfac
