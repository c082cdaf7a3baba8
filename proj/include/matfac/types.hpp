#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "matfac/error.hpp"
#include "matfac/matrix.hpp"

namespace matfac {

/// T observation matrices, each p1 x p2. Also used for noise and common-component panels.
struct MatrixPanel {
  std::size_t p1 = 0;
  std::size_t p2 = 0;
  std::vector<Matrix> slices;

  MatrixPanel() = default;
  MatrixPanel(std::size_t rows, std::size_t cols, std::vector<Matrix> s)
      : p1(rows), p2(cols), slices(std::move(s)) {}

  static MatrixPanel zeros(std::size_t t_len, std::size_t rows, std::size_t cols) {
    return MatrixPanel(rows, cols, std::vector<Matrix>(t_len, Matrix(rows, cols)));
  }

  std::size_t t_len() const noexcept { return slices.size(); }
  const Matrix& operator[](std::size_t t) const { return slices[t]; }
  Matrix& operator[](std::size_t t) { return slices[t]; }
};

/// T factor matrices, each m1 x m2.
struct FactorPath {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::vector<Matrix> slices;

  std::size_t t_len() const noexcept { return slices.size(); }
  const Matrix& operator[](std::size_t t) const { return slices[t]; }
};

/// Row loading r (p1 x k1) and column loading c (p2 x k2).
struct LoadingPair {
  Matrix r;
  Matrix c;
};

/// Projection weights with the diversified-weight diagnostics:
/// max |entry| and lambda_min(WᵀW / p) per side.
struct ProjectionPair {
  Matrix w1;
  Matrix w2;
  double max_abs1 = 0.0;
  double max_abs2 = 0.0;
  double min_gram_eig1 = 0.0;
  double min_gram_eig2 = 0.0;
};

struct FitResult {
  LoadingPair loadings;
  FactorPath factors;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> delta_trace;
  double elapsed_seconds = 0.0;
};

/// Everything the data generator drew. h1 = W1ᵀR/p1 and h2 = W2ᵀC/p2 stay
/// empty until a caller attaches the weights it used.
struct SimulationTruth {
  LoadingPair loadings;
  FactorPath factors;
  MatrixPanel noise;
  Matrix h1;
  Matrix h2;
};

/// Panel of X_tᵀ.
inline MatrixPanel transpose_panel(const MatrixPanel& panel) {
  MatrixPanel out;
  out.p1 = panel.p2;
  out.p2 = panel.p1;
  out.slices.reserve(panel.t_len());
  for (const Matrix& x : panel.slices) out.slices.push_back(x.transpose());
  return out;
}

/// Path of F_tᵀ.
inline FactorPath transpose_path(const FactorPath& f) {
  FactorPath out{f.m2, f.m1, {}};
  out.slices.reserve(f.t_len());
  for (const Matrix& x : f.slices) out.slices.push_back(x.transpose());
  return out;
}

namespace detail {
inline std::string shape(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }
}  // namespace detail

inline void validate_panel(const MatrixPanel& panel) {
  if (panel.t_len() == 0) throw Error(ErrorCode::Empty, "panel has no slices");
  for (std::size_t t = 0; t < panel.t_len(); ++t) {
    const Matrix& x = panel[t];
    if (x.rows() != panel.p1 || x.cols() != panel.p2)
      throw Error(ErrorCode::DimMismatch, "slice " + std::to_string(t) + ": expected " +
                                              detail::shape(panel.p1, panel.p2) + ", got " +
                                              detail::shape(x.rows(), x.cols()));
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j)
        if (!std::isfinite(x(i, j)))
          throw Error(ErrorCode::NonFinite, "entry (t=" + std::to_string(t) + ", i=" + std::to_string(i) +
                                                ", j=" + std::to_string(j) + ") is not finite");
  }
}

inline void validate_factor_path(const FactorPath& f) {
  for (std::size_t t = 0; t < f.t_len(); ++t) {
    if (f[t].rows() != f.m1 || f[t].cols() != f.m2)
      throw Error(ErrorCode::DimMismatch, "factor slice " + std::to_string(t) + ": expected " +
                                              detail::shape(f.m1, f.m2) + ", got " +
                                              detail::shape(f[t].rows(), f[t].cols()));
    if (!f[t].all_finite()) throw Error(ErrorCode::NonFinite, "factor slice " + std::to_string(t));
  }
}

}  // namespace matfac
