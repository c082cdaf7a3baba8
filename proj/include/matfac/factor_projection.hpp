#pragma once

#include <algorithm>
#include <cstddef>
#include <string>

#include "matfac/error.hpp"
#include "matfac/linalg.hpp"
#include "matfac/types.hpp"

namespace matfac {

/// leftᵀ X_t right / (p1 p2) for every slice.
inline FactorPath project_factors(const MatrixPanel& panel, const Matrix& left, const Matrix& right) {
  if (left.rows() != panel.p1 || right.rows() != panel.p2)
    throw Error(ErrorCode::DimMismatch, "projection " + detail::shape(left.rows(), left.cols()) + " / " +
                                            detail::shape(right.rows(), right.cols()) + " against panel " +
                                            detail::shape(panel.p1, panel.p2));
  const double scale = 1.0 / (static_cast<double>(panel.p1) * static_cast<double>(panel.p2));
  FactorPath out{left.cols(), right.cols(), {}};
  out.slices.reserve(panel.t_len());
  for (const Matrix& x : panel.slices) {
    Matrix f = matmul_tn(left, matmul(x, right));
    f *= scale;
    out.slices.push_back(std::move(f));
  }
  return out;
}

/// Bi-diversified factor estimate W1ᵀ X_t W2 / (p1 p2).
inline FactorPath estimate_factors(const MatrixPanel& panel, const ProjectionPair& w) {
  return project_factors(panel, w.w1, w.w2);
}

/// T x (m1 m2) matrix whose t-th row is vec(F_t)ᵀ.
inline Matrix stack_vec_rows(const FactorPath& f) {
  Matrix out(f.t_len(), f.m1 * f.m2);
  for (std::size_t t = 0; t < f.t_len(); ++t) {
    const Matrix v = vec(f[t]);
    std::copy(v.data().begin(), v.data().end(), out.row(t).begin());
  }
  return out;
}

/// Orthogonal projector A (AᵀA)⁺ Aᵀ onto the column space of a.
inline Matrix column_projector(const Matrix& a) {
  return matmul_nt(matmul(a, sym_pinv(matmul_tn(a, a))), a);
}

struct FactorSpaceReport {
  double per_t_transform_error = 0.0;  ///< max_t ||M1ᵀ F̂_t M2 - F_t||_2
  double projector_error = 0.0;        ///< ||P_F̂ P_F - P_F||_2
  double projector_error_m = 0.0;      ///< ||P_{F̂M} - P_F||_2
  double nu_min_h1 = 0.0;
  double nu_min_h2 = 0.0;
};

namespace detail {

inline void require_full_column_rank(const Matrix& h, const char* name) {
  const std::size_t rank = sym_rank(matmul_tn(h, h));
  if (rank < h.cols())
    throw RankDeficientError(h.cols() - rank, std::string(name) + " has rank " + std::to_string(rank) +
                                                  " < " + std::to_string(h.cols()));
}

/// (H Hᵀ)⁺ H
inline Matrix transform_pinv(const Matrix& h) { return matmul(sym_pinv(matmul_nt(h, h)), h); }

}  // namespace detail

/// Distances between the estimated and true factor spaces given the
/// transforms h1 = W1ᵀR/p1 (m1 x k1) and h2 = W2ᵀC/p2 (m2 x k2).
inline FactorSpaceReport factor_space_errors(const FactorPath& fhat, const FactorPath& truth, const Matrix& h1,
                                             const Matrix& h2) {
  if (fhat.t_len() != truth.t_len() || fhat.t_len() == 0)
    throw Error(ErrorCode::DimMismatch, "factor paths have lengths " + std::to_string(fhat.t_len()) + " and " +
                                            std::to_string(truth.t_len()));
  if (h1.rows() != fhat.m1 || h2.rows() != fhat.m2 || h1.cols() != truth.m1 || h2.cols() != truth.m2)
    throw Error(ErrorCode::DimMismatch, "transform shapes do not match the factor paths");
  detail::require_full_column_rank(h1, "H1");
  detail::require_full_column_rank(h2, "H2");

  FactorSpaceReport rep;
  rep.nu_min_h1 = singular_values(h1).at(h1.cols() - 1);
  rep.nu_min_h2 = singular_values(h2).at(h2.cols() - 1);

  const Matrix m1 = detail::transform_pinv(h1);
  const Matrix m2 = detail::transform_pinv(h2);
  for (std::size_t t = 0; t < fhat.t_len(); ++t) {
    Matrix diff = matmul(matmul_tn(m1, fhat[t]), m2);
    diff -= truth[t];
    rep.per_t_transform_error = std::max(rep.per_t_transform_error, spectral_norm(diff));
  }

  const Matrix fh = stack_vec_rows(fhat);
  const Matrix ft = stack_vec_rows(truth);
  const Matrix pf = column_projector(ft);
  const Matrix pfh = column_projector(fh);
  rep.projector_error = spectral_norm(matmul(pfh, pf) - pf);

  const Matrix m = detail::transform_pinv(kron(h2, h1));
  rep.projector_error_m = spectral_norm(column_projector(matmul(fh, m)) - pf);
  return rep;
}

}  // namespace matfac
