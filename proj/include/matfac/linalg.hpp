#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "matfac/error.hpp"
#include "matfac/matrix.hpp"

namespace matfac {

/// Eigenpairs of a symmetric matrix. values descending, vectors as columns.
struct SymEig {
  std::vector<double> values;
  Matrix vectors;
};

inline constexpr double kDefaultRelFloor = 1e-12;
inline constexpr double kSymmetryTol = 1e-8;

namespace detail {

inline void require_square_finite(const Matrix& a, const char* who) {
  if (!a.is_square())
    throw Error(ErrorCode::NonSquare, std::string(who) + ": " + std::to_string(a.rows()) + "x" +
                                          std::to_string(a.cols()));
  if (!a.all_finite()) throw Error(ErrorCode::NonFinite, std::string(who) + ": input has NaN/Inf");
}

inline void require_symmetric(const Matrix& a, const char* who) {
  double asym = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double d = a(i, j) - a(j, i);
      asym += 2.0 * d * d;
    }
  if (std::sqrt(asym) > kSymmetryTol * frobenius_norm(a))
    throw Error(ErrorCode::NotSymmetric, std::string(who) + ": relative asymmetry above 1e-8");
}

// Largest-magnitude component positive; ties go to the lowest index.
inline void fix_sign(Matrix& v, std::size_t j) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double x = std::abs(v(i, j));
    if (x > best_abs) {
      best_abs = x;
      best = i;
    }
  }
  if (v(best, j) < 0.0)
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition of (a + aᵀ)/2.
inline SymEig sym_eig(const Matrix& input) {
  detail::require_square_finite(input, "sym_eig");
  detail::require_symmetric(input, "sym_eig");
  const std::size_t n = input.rows();
  Matrix a = symmetrize(input);
  Matrix vt = Matrix::identity(n);  // row k holds eigenvector k

  const double scale = frobenius_norm(a);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * scale) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // Rows p and q equal columns p and q by symmetry; rotate them
        // contiguously and mirror into the columns.
        double* rp = a.row(p).data();
        double* rq = a.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          const double x = rp[k];
          const double y = rq[k];
          rp[k] = c * x - s * y;
          rq[k] = s * x + c * y;
        }
        for (std::size_t k = 0; k < n; ++k) {
          a(k, p) = rp[k];
          a(k, q) = rq[k];
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;

        double* vp = vt.row(p).data();
        double* vq = vt.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEig out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = vt(order[k], i);
    detail::fix_sign(out.vectors, k);
  }
  return out;
}

namespace detail {

template <class Fn>
Matrix spectral_apply(const SymEig& e, Fn&& fn) {
  const std::size_t n = e.values.size();
  Matrix scaled = e.vectors;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fn(e.values[k]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, k) *= f;
  }
  return symmetrize(matmul_nt(scaled, e.vectors));
}

inline std::size_t count_floored(const SymEig& e, double rel_floor) {
  const double lmax = e.values.empty() ? 0.0 : e.values.front();
  std::size_t floored = 0;
  for (double l : e.values)
    if (!(lmax > 0.0) || l <= rel_floor * lmax) ++floored;
  return floored;
}

}  // namespace detail

/// Principal inverse square root of an SPD matrix. Eigenvalues at or below
/// rel_floor * lambda_max raise RankDeficientError.
inline Matrix spd_inv_sqrt(const Matrix& a, double rel_floor = kDefaultRelFloor) {
  if (!(rel_floor > 0.0 && rel_floor < 1.0)) throw Error(ErrorCode::BadConfig, "rel_floor must lie in (0, 1)");
  const SymEig e = sym_eig(a);
  if (const std::size_t floored = detail::count_floored(e, rel_floor); floored > 0)
    throw RankDeficientError(floored, "spd_inv_sqrt");
  return detail::spectral_apply(e, [](double l) { return 1.0 / std::sqrt(l); });
}

/// Principal square root of a PSD matrix; negative roundoff eigenvalues are clipped to zero.
inline Matrix spd_sqrt(const Matrix& a) {
  const SymEig e = sym_eig(a);
  return detail::spectral_apply(e, [](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
}

/// Moore-Penrose inverse of a symmetric PSD matrix; eigenvalues at or below
/// rel_floor * lambda_max are zeroed, not inverted.
inline Matrix sym_pinv(const Matrix& a, double rel_floor = kDefaultRelFloor) {
  const SymEig e = sym_eig(a);
  const double lmax = e.values.empty() ? 0.0 : e.values.front();
  return detail::spectral_apply(e, [&](double l) { return (lmax > 0.0 && l > rel_floor * lmax) ? 1.0 / l : 0.0; });
}

/// Number of eigenvalues strictly above rel_floor * lambda_max.
inline std::size_t sym_rank(const Matrix& a, double rel_floor = kDefaultRelFloor) {
  const SymEig e = sym_eig(a);
  return e.values.size() - detail::count_floored(e, rel_floor);
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
inline Matrix gram_schmidt(const Matrix& m) {
  if (m.cols() > m.rows())
    throw Error(ErrorCode::RankDeficient, "gram_schmidt: more columns (" + std::to_string(m.cols()) +
                                              ") than rows (" + std::to_string(m.rows()) + ")");
  if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "gram_schmidt: input has NaN/Inf");
  const std::size_t n = m.rows();
  std::vector<std::vector<double>> q;
  q.reserve(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::vector<double> v = m.col(j);
    double initial = 0.0;
    for (double x : v) initial += x * x;
    initial = std::sqrt(initial);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : q) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += b[i] * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= dot * b[i];
      }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (!(initial > 0.0) || norm < 1e-12 * initial)
      throw RankDeficientError(1, "gram_schmidt: column " + std::to_string(j) + " is dependent");
    for (double& x : v) x /= norm;
    q.push_back(std::move(v));
  }
  Matrix out(n, m.cols());
  for (std::size_t j = 0; j < q.size(); ++j) out.set_col(j, q[j]);
  return out;
}

/// Largest singular value, sqrt(lambda_max) of the smaller Gram matrix.
inline double spectral_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  const Matrix g = a.rows() < a.cols() ? matmul_nt(a, a) : matmul_tn(a, a);
  const SymEig e = sym_eig(g);
  return std::sqrt(std::max(e.values.front(), 0.0));
}

/// Singular values (descending) through the Gram matrix of the narrow side.
inline std::vector<double> singular_values(const Matrix& a) {
  const Matrix g = a.rows() < a.cols() ? matmul_nt(a, a) : matmul_tn(a, a);
  SymEig e = sym_eig(g);
  for (double& l : e.values) l = std::sqrt(std::max(l, 0.0));
  return e.values;
}

/// Sum of term(i) over [begin, end) by recursive halving. The split points only
/// depend on the range, so the rounding is identical however terms are produced.
template <class Term>
Matrix pairwise_sum(std::size_t begin, std::size_t end, Term&& term) {
  if (end <= begin) throw Error(ErrorCode::Empty, "pairwise_sum over empty range");
  if (end - begin == 1) return term(begin);
  const std::size_t mid = begin + (end - begin) / 2;
  Matrix left = pairwise_sum(begin, mid, term);
  left += pairwise_sum(mid, end, term);
  return left;
}

}  // namespace matfac
