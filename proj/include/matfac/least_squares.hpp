#pragma once

#include <cmath>
#include <cstddef>

#include "matfac/error.hpp"
#include "matfac/linalg.hpp"
#include "matfac/types.hpp"

namespace matfac {

namespace detail {

inline void check_ls_inputs(const MatrixPanel& panel, const FactorPath& f, std::size_t side_rows,
                            std::size_t side_cols, std::size_t expected_rows, std::size_t expected_cols,
                            const char* who) {
  if (panel.t_len() == 0 || f.t_len() != panel.t_len())
    throw Error(ErrorCode::DimMismatch, std::string(who) + ": panel has " + std::to_string(panel.t_len()) +
                                            " slices, factors " + std::to_string(f.t_len()));
  if (side_rows != expected_rows || side_cols != expected_cols)
    throw Error(ErrorCode::DimMismatch, std::string(who) + ": side matrix is " + shape(side_rows, side_cols) +
                                            ", expected " + shape(expected_rows, expected_cols));
}

// sqrt(p) * A (AᵀA)^{-1/2}: the constrained maximizer of tr(LᵀA) over LᵀL = p I.
inline Matrix polar_scaled(const Matrix& moment, std::size_t p, double rel_floor) {
  Matrix out = matmul(moment, spd_inv_sqrt(matmul_tn(moment, moment), rel_floor));
  out *= std::sqrt(static_cast<double>(p));
  return out;
}

}  // namespace detail

/// Σ_t X_t right F_tᵀ   (p1 x m1)
inline Matrix row_moment(const MatrixPanel& panel, const FactorPath& f, const Matrix& right) {
  detail::check_ls_inputs(panel, f, right.rows(), right.cols(), panel.p2, f.m2, "row_moment");
  return pairwise_sum(0, panel.t_len(), [&](std::size_t t) { return matmul_nt(matmul(panel[t], right), f[t]); });
}

/// Σ_t X_tᵀ left F_t   (p2 x m2)
inline Matrix col_moment(const MatrixPanel& panel, const FactorPath& f, const Matrix& left) {
  detail::check_ls_inputs(panel, f, left.rows(), left.cols(), panel.p1, f.m1, "col_moment");
  return pairwise_sum(0, panel.t_len(), [&](std::size_t t) { return matmul(matmul_tn(panel[t], left), f[t]); });
}

/// Row loading minimizing (1/T) Σ ||X_t - R F_t rightᵀ||_F² subject to RᵀR = p1 I.
inline Matrix update_row_loading(const MatrixPanel& panel, const FactorPath& f, const Matrix& right,
                                 double rel_floor = kDefaultRelFloor) {
  return detail::polar_scaled(row_moment(panel, f, right), panel.p1, rel_floor);
}

/// Column loading minimizing (1/T) Σ ||X_t - left F_t Cᵀ||_F² subject to CᵀC = p2 I.
inline Matrix update_col_loading(const MatrixPanel& panel, const FactorPath& f, const Matrix& left,
                                 double rel_floor = kDefaultRelFloor) {
  return detail::polar_scaled(col_moment(panel, f, left), panel.p2, rel_floor);
}

/// Closed-form multiplier sqrt(p)/T (AᵀA)^{1/2} of the normalization constraint for a moment A.
inline Matrix lagrange_multiplier(const Matrix& moment, std::size_t p, std::size_t t_len) {
  Matrix theta = spd_sqrt(matmul_tn(moment, moment));
  theta *= std::sqrt(static_cast<double>(p)) / static_cast<double>(t_len);
  return theta;
}

/// S_t = left F_t rightᵀ
inline MatrixPanel common_components(const Matrix& left, const Matrix& right, const FactorPath& f) {
  if (left.cols() != f.m1 || right.cols() != f.m2)
    throw Error(ErrorCode::DimMismatch, "common_components: loadings " + detail::shape(left.rows(), left.cols()) +
                                            ", " + detail::shape(right.rows(), right.cols()) + " vs factors " +
                                            detail::shape(f.m1, f.m2));
  MatrixPanel out;
  out.p1 = left.rows();
  out.p2 = right.rows();
  out.slices.reserve(f.t_len());
  for (const Matrix& ft : f.slices) out.slices.push_back(matmul_nt(matmul(left, ft), right));
  return out;
}

inline MatrixPanel common_components(const LoadingPair& loadings, const FactorPath& f) {
  return common_components(loadings.r, loadings.c, f);
}

}  // namespace matfac
