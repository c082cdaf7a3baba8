#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>

#include "matfac/baselines.hpp"
#include "matfac/error.hpp"
#include "matfac/factor_projection.hpp"
#include "matfac/least_squares.hpp"
#include "matfac/types.hpp"
#include "matfac/weights.hpp"

namespace matfac {

struct GaussianInit {
  std::uint64_t seed = 0;
};
struct HadamardInit {};
struct AlphaPcaInit {};
struct ExplicitInit {
  ProjectionPair weights;
};
using InitSpec = std::variant<GaussianInit, HadamardInit, AlphaPcaInit, ExplicitInit>;

enum class DeltaMode { Absolute, Relative };

inline std::string_view to_string(DeltaMode m) noexcept { return m == DeltaMode::Absolute ? "absolute" : "relative"; }

struct RpilsConfig {
  std::size_t m1 = 3;
  std::size_t m2 = 3;
  double epsilon = 1e-6;
  std::size_t max_iter = 100;
  InitSpec init = GaussianInit{};
  DeltaMode delta_mode = DeltaMode::Absolute;
  double rel_floor = kDefaultRelFloor;
};

/// Snapshot handed to an observer. step 0 is the state after the one-step
/// stage; step s >= 1 is the state after the s-th repetition of the update.
struct IterationState {
  std::size_t step;
  const Matrix& r;
  const Matrix& c;
  const FactorPath& factors;
  double delta;  ///< NaN at step 0
};
using IterationObserver = std::function<void(const IterationState&)>;

/// A fit that failed mid-iteration; last_state holds the last complete iterate.
class FitError : public Error {
 public:
  FitError(ErrorCode code, const std::string& detail, FitResult last)
      : Error(code, detail), last_state_(std::move(last)) {}
  const FitResult& last_state() const noexcept { return last_state_; }

 private:
  FitResult last_state_;
};

namespace detail {

inline void validate_rpils(const MatrixPanel& panel, const RpilsConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::BadConfig, "epsilon must be positive");
  if (cfg.max_iter < 1) throw Error(ErrorCode::BadConfig, "max_iter must be at least 1");
  validate_panel(panel);
  if (cfg.m1 < 1 || cfg.m2 < 1 || cfg.m1 > panel.p1 || cfg.m2 > panel.p2)
    throw Error(ErrorCode::BadDims, "working factor numbers m1=" + std::to_string(cfg.m1) +
                                        ", m2=" + std::to_string(cfg.m2) + " exceed panel " +
                                        shape(panel.p1, panel.p2));
}

inline double panel_frobenius_diff(const MatrixPanel& a, const MatrixPanel& b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.t_len(); ++t) {
    const auto x = a[t].data();
    const auto y = b[t].data();
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  }
  return std::sqrt(s);
}

inline double panel_frobenius(const MatrixPanel& a) {
  double s = 0.0;
  for (const Matrix& x : a.slices) s += frobenius_sq(x);
  return std::sqrt(s);
}

struct OneStepState {
  ProjectionPair weights;
  FactorPath factors;
  Matrix r;
  Matrix c;
};

inline OneStepState one_step(const MatrixPanel& panel, const RpilsConfig& cfg);

}  // namespace detail

/// Initial projection weights for a config.
inline ProjectionPair initial_weights(const MatrixPanel& panel, const RpilsConfig& cfg) {
  struct Visitor {
    const MatrixPanel& panel;
    const RpilsConfig& cfg;
    ProjectionPair operator()(const GaussianInit& g) const {
      return gaussian_weights(panel.p1, cfg.m1, panel.p2, cfg.m2, g.seed);
    }
    ProjectionPair operator()(const HadamardInit&) const {
      return hadamard_weights(panel.p1, cfg.m1, panel.p2, cfg.m2);
    }
    ProjectionPair operator()(const AlphaPcaInit&) const {
      FitResult a = alpha_pca_fit(panel, cfg.m1, cfg.m2);
      return make_projection_pair(std::move(a.loadings.r), std::move(a.loadings.c));
    }
    ProjectionPair operator()(const ExplicitInit& e) const {
      const ProjectionPair& w = e.weights;
      if (w.w1.rows() != panel.p1 || w.w1.cols() != cfg.m1 || w.w2.rows() != panel.p2 || w.w2.cols() != cfg.m2)
        throw Error(ErrorCode::DimMismatch, "explicit weights do not match panel and working factor numbers");
      return w;
    }
  };
  return std::visit(Visitor{panel, cfg}, cfg.init);
}

namespace detail {

inline OneStepState one_step(const MatrixPanel& panel, const RpilsConfig& cfg) {
  OneStepState st;
  st.weights = initial_weights(panel, cfg);
  st.factors = estimate_factors(panel, st.weights);
  st.r = update_row_loading(panel, st.factors, st.weights.w2, cfg.rel_floor);
  st.c = update_col_loading(panel, st.factors, st.r, cfg.rel_floor);
  return st;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// One-step estimator: initial factors, then a single row and column least-squares update.
inline FitResult one_step_fit(const MatrixPanel& panel, const RpilsConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  detail::validate_rpils(panel, cfg);
  detail::OneStepState st = detail::one_step(panel, cfg);
  FitResult fit;
  fit.loadings = {std::move(st.r), std::move(st.c)};
  fit.factors = std::move(st.factors);
  fit.elapsed_seconds = detail::seconds_since(start);
  return fit;
}

/// Random-projection iterative least squares.
///
/// After the one-step stage each repetition re-projects the factors on the
/// current loadings, forms the common components R F Cᵀ, and refreshes R then C.
/// The stopping delta is the Frobenius norm of the change in common
/// components stacked over all T slices; in relative mode it is divided by the
/// norm of the previous common components.
inline FitResult rpils_fit(const MatrixPanel& panel, const RpilsConfig& cfg, const IterationObserver& observe = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::validate_rpils(panel, cfg);
  detail::OneStepState st = detail::one_step(panel, cfg);
  if (observe) observe({0, st.r, st.c, st.factors, std::nan("")});

  FitResult fit;
  fit.loadings = {std::move(st.r), std::move(st.c)};
  fit.factors = std::move(st.factors);
  MatrixPanel prev = common_components(fit.loadings, fit.factors);

  for (std::size_t s = 1; s <= cfg.max_iter; ++s) {
    FactorPath f_next = project_factors(panel, fit.loadings.r, fit.loadings.c);
    MatrixPanel s_next = common_components(fit.loadings, f_next);
    Matrix r_next, c_next;
    try {
      r_next = update_row_loading(panel, f_next, fit.loadings.c, cfg.rel_floor);
      c_next = update_col_loading(panel, f_next, r_next, cfg.rel_floor);
    } catch (const RankDeficientError& e) {
      fit.elapsed_seconds = detail::seconds_since(start);
      throw FitError(ErrorCode::RankDeficient, std::string("iteration ") + std::to_string(s) + ": " + e.what(),
                     std::move(fit));
    }
    double delta = detail::panel_frobenius_diff(s_next, prev);
    if (cfg.delta_mode == DeltaMode::Relative) {
      const double base = detail::panel_frobenius(prev);
      if (base > 0.0) delta /= base;
    }
    fit.loadings = {std::move(r_next), std::move(c_next)};
    fit.factors = std::move(f_next);
    fit.delta_trace.push_back(delta);
    fit.iterations = s;
    prev = std::move(s_next);
    if (observe) observe({s, fit.loadings.r, fit.loadings.c, fit.factors, delta});
    if (delta <= cfg.epsilon) {
      fit.converged = true;
      break;
    }
  }
  fit.elapsed_seconds = detail::seconds_since(start);
  return fit;
}

}  // namespace matfac
