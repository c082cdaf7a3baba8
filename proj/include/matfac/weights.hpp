#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>

#include "matfac/error.hpp"
#include "matfac/linalg.hpp"
#include "matfac/rng.hpp"
#include "matfac/types.hpp"

namespace matfac {

inline constexpr double kMinGramEig = 1e-6;
inline constexpr int kWeightRetries = 5;

namespace detail {

inline void check_weight_dims(std::size_t p1, std::size_t m1, std::size_t p2, std::size_t m2) {
  if (m1 < 1 || m2 < 1 || m1 > p1 || m2 > p2)
    throw Error(ErrorCode::BadDims, "need 1 <= m1 <= p1 and 1 <= m2 <= p2, got m1=" + std::to_string(m1) +
                                        " p1=" + std::to_string(p1) + " m2=" + std::to_string(m2) +
                                        " p2=" + std::to_string(p2));
}

inline double min_gram_eig(const Matrix& w) {
  Matrix g = matmul_tn(w, w);
  g *= 1.0 / static_cast<double>(w.rows());
  return sym_eig(g).values.back();
}

}  // namespace detail

/// Wraps explicit weights and fills in the diversified-weight diagnostics.
inline ProjectionPair make_projection_pair(Matrix w1, Matrix w2) {
  if (!w1.all_finite() || !w2.all_finite()) throw Error(ErrorCode::NonFinite, "projection weights");
  ProjectionPair p;
  p.max_abs1 = max_abs(w1);
  p.max_abs2 = max_abs(w2);
  p.min_gram_eig1 = detail::min_gram_eig(w1);
  p.min_gram_eig2 = detail::min_gram_eig(w2);
  p.w1 = std::move(w1);
  p.w2 = std::move(w2);
  return p;
}

inline bool is_diversified(const ProjectionPair& p, double min_eig = kMinGramEig) noexcept {
  return std::isfinite(p.max_abs1) && std::isfinite(p.max_abs2) && p.min_gram_eig1 > min_eig &&
         p.min_gram_eig2 > min_eig;
}

/// I.i.d. standard normal weights. Attempt a draws from derive_seed(seed, a);
/// a draw whose Gram matrix is near singular is redrawn up to five times.
inline ProjectionPair gaussian_weights(std::size_t p1, std::size_t m1, std::size_t p2, std::size_t m2,
                                       std::uint64_t seed) {
  detail::check_weight_dims(p1, m1, p2, m2);
  for (int attempt = 0; attempt <= kWeightRetries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    Matrix w1(p1, m1);
    Matrix w2(p2, m2);
    for (double& x : w1.data()) x = rng.normal();
    for (double& x : w2.data()) x = rng.normal();
    ProjectionPair pair = make_projection_pair(std::move(w1), std::move(w2));
    if (is_diversified(pair)) return pair;
  }
  throw Error(ErrorCode::DegenerateWeights,
              "no well-conditioned Gaussian draw after " + std::to_string(kWeightRetries) + " retries");
}

/// Entry (i, j) of the Sylvester Walsh-Hadamard matrix of any power-of-two order.
constexpr double hadamard_entry(std::size_t i, std::size_t j) noexcept {
  return (std::popcount(static_cast<std::uint64_t>(i & j)) & 1U) ? -1.0 : 1.0;
}

/// First m columns of the Sylvester Hadamard matrix of order 2^ceil(log2 p), first p rows kept.
inline Matrix hadamard_block(std::size_t p, std::size_t m) {
  Matrix w(p, m);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < m; ++j) w(i, j) = hadamard_entry(i, j);
  return w;
}

inline ProjectionPair hadamard_weights(std::size_t p1, std::size_t m1, std::size_t p2, std::size_t m2) {
  detail::check_weight_dims(p1, m1, p2, m2);
  ProjectionPair pair = make_projection_pair(hadamard_block(p1, m1), hadamard_block(p2, m2));
  if (!is_diversified(pair))
    throw Error(ErrorCode::DegenerateWeights, "truncated Hadamard columns are nearly dependent");
  return pair;
}

}  // namespace matfac
