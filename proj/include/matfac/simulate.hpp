#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "matfac/error.hpp"
#include "matfac/least_squares.hpp"
#include "matfac/linalg.hpp"
#include "matfac/rng.hpp"
#include "matfac/types.hpp"

namespace matfac {

/// Matrix factor model with AR(1) factors and AR(1) matrix-normal noise:
///   X_t = R F_t Cᵀ + E_t
///   F_t = phi F_{t-1} + sqrt(1 - phi²) eps_t,   vec(eps_t) ~ N(0, I)
///   E_t = psi E_{t-1} + sqrt(1 - psi²) U_t,     vec(U_t) ~ N(0, V_E ⊗ U_E)
/// with R, C entries U(-1, 1) and U_E (V_E) having unit diagonal and 1/p1 (1/p2) off the diagonal.
struct SimConfig {
  std::size_t t_len = 20;
  std::size_t p1 = 20;
  std::size_t p2 = 20;
  std::size_t k1 = 3;
  std::size_t k2 = 3;
  double phi = 0.1;
  double psi = 0.1;
  std::uint64_t seed = 0;
  std::size_t burn_in = 200;
};

/// Stream ids under the config seed, one per random component.
enum class SimStream : std::uint64_t { RowLoading = 1, ColLoading = 2, FactorNoise = 3, Idiosyncratic = 4 };

inline void validate_sim_config(const SimConfig& cfg) {
  if (cfg.t_len < 1 || cfg.p1 < 1 || cfg.p2 < 1 || cfg.k1 < 1 || cfg.k2 < 1)
    throw Error(ErrorCode::BadConfig, "simulation dimensions must be positive");
  if (!(std::abs(cfg.phi) < 1.0) || !(std::abs(cfg.psi) < 1.0))
    throw Error(ErrorCode::BadConfig, "AR coefficients need |phi| < 1 and |psi| < 1");
}

/// (1 - 1/p) I + (1/p) 11ᵀ
inline Matrix equicorrelated_cov(std::size_t p) {
  const double off = 1.0 / static_cast<double>(p);
  Matrix m(p, p, off);
  for (std::size_t i = 0; i < p; ++i) m(i, i) = 1.0;
  return m;
}

/// Symmetric square roots of U_E and V_E. Depends only on (p1, p2), so
/// replication loops build it once per configuration.
struct NoiseFactors {
  Matrix row_sqrt;  ///< U_E^{1/2}, p1 x p1
  Matrix col_sqrt;  ///< V_E^{1/2}, p2 x p2

  static NoiseFactors for_dims(std::size_t p1, std::size_t p2) {
    return {spd_sqrt(equicorrelated_cov(p1)), spd_sqrt(equicorrelated_cov(p2))};
  }
};

struct SimulatedPanel {
  MatrixPanel panel;
  SimulationTruth truth;
};

/// Draws one panel. The AR recursions start from zero and run burn_in steps
/// before the T retained ones. Because the noise transform is linear,
/// the recursion runs on the untransformed Gaussian draws and only the
/// retained slices are mapped through U_E^{1/2} (.) V_E^{1/2}.
inline SimulatedPanel simulate_panel(const SimConfig& cfg, const NoiseFactors& noise_factors) {
  validate_sim_config(cfg);
  if (noise_factors.row_sqrt.rows() != cfg.p1 || noise_factors.col_sqrt.rows() != cfg.p2)
    throw Error(ErrorCode::DimMismatch, "noise factors built for other dimensions");

  SimulatedPanel out;
  SimulationTruth& truth = out.truth;

  Rng rng_r(derive_seed(cfg.seed, static_cast<std::uint64_t>(SimStream::RowLoading)));
  Rng rng_c(derive_seed(cfg.seed, static_cast<std::uint64_t>(SimStream::ColLoading)));
  truth.loadings.r = Matrix(cfg.p1, cfg.k1);
  truth.loadings.c = Matrix(cfg.p2, cfg.k2);
  for (double& x : truth.loadings.r.data()) x = rng_r.uniform(-1.0, 1.0);
  for (double& x : truth.loadings.c.data()) x = rng_c.uniform(-1.0, 1.0);

  const std::size_t total = cfg.burn_in + cfg.t_len;

  Rng rng_f(derive_seed(cfg.seed, static_cast<std::uint64_t>(SimStream::FactorNoise)));
  const double f_innov = std::sqrt(1.0 - cfg.phi * cfg.phi);
  truth.factors = FactorPath{cfg.k1, cfg.k2, {}};
  truth.factors.slices.reserve(cfg.t_len);
  Matrix f(cfg.k1, cfg.k2);
  for (std::size_t step = 0; step < total; ++step) {
    // Column-major fill so vec(eps_t) is the draw order.
    for (std::size_t j = 0; j < cfg.k2; ++j)
      for (std::size_t i = 0; i < cfg.k1; ++i) f(i, j) = cfg.phi * f(i, j) + f_innov * rng_f.normal();
    if (step >= cfg.burn_in) truth.factors.slices.push_back(f);
  }

  Rng rng_e(derive_seed(cfg.seed, static_cast<std::uint64_t>(SimStream::Idiosyncratic)));
  const double e_innov = std::sqrt(1.0 - cfg.psi * cfg.psi);
  truth.noise = MatrixPanel(cfg.p1, cfg.p2, {});
  truth.noise.slices.reserve(cfg.t_len);
  Matrix e(cfg.p1, cfg.p2);
  for (std::size_t step = 0; step < total; ++step) {
    for (std::size_t j = 0; j < cfg.p2; ++j)
      for (std::size_t i = 0; i < cfg.p1; ++i) e(i, j) = cfg.psi * e(i, j) + e_innov * rng_e.normal();
    if (step >= cfg.burn_in)
      truth.noise.slices.push_back(matmul(matmul(noise_factors.row_sqrt, e), noise_factors.col_sqrt));
  }

  out.panel = common_components(truth.loadings, truth.factors);
  for (std::size_t t = 0; t < cfg.t_len; ++t) out.panel[t] += truth.noise[t];
  return out;
}

inline SimulatedPanel simulate_panel(const SimConfig& cfg) {
  return simulate_panel(cfg, NoiseFactors::for_dims(cfg.p1, cfg.p2));
}

/// Fills truth.h1 = W1ᵀR/p1 and truth.h2 = W2ᵀC/p2 for the weights a caller used.
inline void attach_transforms(SimulationTruth& truth, const Matrix& w1, const Matrix& w2) {
  truth.h1 = matmul_tn(w1, truth.loadings.r);
  truth.h1 *= 1.0 / static_cast<double>(w1.rows());
  truth.h2 = matmul_tn(w2, truth.loadings.c);
  truth.h2 *= 1.0 / static_cast<double>(w2.rows());
}

/// Noise-free panel S_t = R F_t Cᵀ.
inline MatrixPanel signal_panel(const SimulationTruth& truth) { return common_components(truth.loadings, truth.factors); }

enum class Scenario { A, B };

inline char to_char(Scenario s) noexcept { return s == Scenario::A ? 'A' : 'B'; }

/// Scenario A: p1 = 20, T = p2 in {20, 50, 100, 150, 200}.
/// Scenario B: p2 = 20, T = p1 over the same values. k = 3, phi = psi = 0.1 throughout.
inline std::vector<SimConfig> scenario_grid(Scenario which) {
  std::vector<SimConfig> grid;
  for (std::size_t n : {20u, 50u, 100u, 150u, 200u}) {
    SimConfig c;
    c.t_len = n;
    c.p1 = which == Scenario::A ? 20 : n;
    c.p2 = which == Scenario::A ? n : 20;
    c.k1 = c.k2 = 3;
    c.phi = c.psi = 0.1;
    grid.push_back(c);
  }
  return grid;
}

}  // namespace matfac
