#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "matfac/baselines.hpp"
#include "matfac/error.hpp"
#include "matfac/io.hpp"
#include "matfac/metrics.hpp"
#include "matfac/rng.hpp"
#include "matfac/rpils.hpp"
#include "matfac/simulate.hpp"

namespace matfac {

enum class Estimator { Rpils, Ose1, Ose2, AlphaPca };

inline std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::Rpils: return "rpils";
    case Estimator::Ose1: return "ose1";
    case Estimator::Ose2: return "ose2";
    case Estimator::AlphaPca: return "alpha-pca";
  }
  return "unknown";
}

inline std::optional<Estimator> parse_estimator(std::string_view s) noexcept {
  for (Estimator e : {Estimator::Rpils, Estimator::Ose1, Estimator::Ose2, Estimator::AlphaPca})
    if (to_string(e) == s) return e;
  return std::nullopt;
}

/// Settings shared by every estimator. For alpha-PCA m1, m2 are the ranks.
struct EstimatorOptions {
  std::size_t m1 = 3;
  std::size_t m2 = 3;
  double epsilon = 1e-6;
  std::size_t max_iter = 100;
  DeltaMode delta_mode = DeltaMode::Absolute;
};

inline RpilsConfig rpils_config(const EstimatorOptions& o, InitSpec init) {
  RpilsConfig cfg;
  cfg.m1 = o.m1;
  cfg.m2 = o.m2;
  cfg.epsilon = o.epsilon;
  cfg.max_iter = o.max_iter;
  cfg.delta_mode = o.delta_mode;
  cfg.init = std::move(init);
  return cfg;
}

/// rpils and ose1 start from Gaussian weights drawn with weight_seed;
/// ose2 starts from alpha-PCA loadings.
inline FitResult fit_estimator(const MatrixPanel& panel, Estimator est, const EstimatorOptions& o,
                               std::uint64_t weight_seed) {
  switch (est) {
    case Estimator::Rpils: return rpils_fit(panel, rpils_config(o, GaussianInit{weight_seed}));
    case Estimator::Ose1: return one_step_fit(panel, rpils_config(o, GaussianInit{weight_seed}));
    case Estimator::Ose2: return one_step_fit(panel, rpils_config(o, AlphaPcaInit{}));
    case Estimator::AlphaPca: return alpha_pca_fit(panel, o.m1, o.m2);
  }
  throw Error(ErrorCode::BadConfig, "unknown estimator");
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into slot i, so output order never depends on scheduling.
/// The first exception thrown by any task is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Stream id of the projection weights under a replication seed.
inline constexpr std::uint64_t kWeightStream = 0x57454947;  // "WEIG"

/// Seed of replication r; the same for every grid configuration.
inline std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t r) noexcept {
  return derive_seed(base_seed, static_cast<std::uint64_t>(r));
}

struct ReplicationMetrics {
  double d_row = 0.0;
  double d_col = 0.0;
  double d_vec_factor = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double fit_seconds = 0.0;
};

/// One replication: simulate with the seed already in cfg, then fit every estimator on the same panel.
inline std::vector<ReplicationMetrics> run_replication(const SimConfig& cfg, const NoiseFactors& noise,
                                                       const std::vector<Estimator>& estimators,
                                                       const EstimatorOptions& o) {
  const SimulatedPanel sim = simulate_panel(cfg, noise);
  const std::uint64_t weight_seed = derive_seed(cfg.seed, kWeightStream);
  // ose2 starts from the alpha-PCA loadings; reuse them when both are requested.
  std::optional<FitResult> alpha;
  const auto fit_one = [&](Estimator est) -> FitResult {
    if (est == Estimator::AlphaPca) {
      if (!alpha) alpha = alpha_pca_fit(sim.panel, o.m1, o.m2);
      return *alpha;
    }
    if (est == Estimator::Ose2 && alpha)
      return one_step_fit(sim.panel, rpils_config(o, ExplicitInit{make_projection_pair(alpha->loadings.r,
                                                                                       alpha->loadings.c)}));
    return fit_estimator(sim.panel, est, o, weight_seed);
  };
  std::vector<ReplicationMetrics> out;
  out.reserve(estimators.size());
  for (Estimator est : estimators) {
    const FitResult fit = fit_one(est);
    ReplicationMetrics m;
    m.d_row = space_distance(fit.loadings.r, sim.truth.loadings.r);
    m.d_col = space_distance(fit.loadings.c, sim.truth.loadings.c);
    m.d_vec_factor = vec_factor_distance(fit.factors, sim.truth.factors);
    m.iterations = fit.iterations;
    m.converged = fit.converged;
    m.fit_seconds = fit.elapsed_seconds;
    out.push_back(m);
  }
  return out;
}

struct ReplicationStudy {
  Scenario scenario = Scenario::A;
  std::vector<Estimator> estimators{Estimator::Rpils};
  std::size_t reps = 500;
  std::uint64_t seed = 0;
  EstimatorOptions options;
  std::vector<std::size_t> t_values;  ///< restrict the grid to these T; empty keeps all five
  std::size_t threads = 1;
};

struct ReportRow {
  Scenario scenario;
  std::size_t t_len, p1, p2;
  Estimator estimator;
  std::string metric;
  Summary summary;
  std::size_t reps;
};

/// Raw per-replication metrics, indexed [config][estimator][replication].
struct StudyResult {
  std::vector<SimConfig> configs;
  std::vector<std::vector<std::vector<ReplicationMetrics>>> metrics;
  std::vector<ReportRow> rows;
};

inline StudyResult run_study(const ReplicationStudy& study) {
  if (study.reps < 1) throw Error(ErrorCode::BadConfig, "reps must be at least 1");
  if (study.estimators.empty()) throw Error(ErrorCode::BadConfig, "no estimators selected");
  StudyResult res;
  for (const SimConfig& c : scenario_grid(study.scenario)) {
    const bool keep = study.t_values.empty() ||
                      std::find(study.t_values.begin(), study.t_values.end(), c.t_len) != study.t_values.end();
    if (keep) res.configs.push_back(c);
  }
  if (res.configs.empty()) throw Error(ErrorCode::BadConfig, "no grid configuration matches the requested T values");

  const std::size_t ne = study.estimators.size();
  for (const SimConfig& base : res.configs) {
    const NoiseFactors noise = NoiseFactors::for_dims(base.p1, base.p2);
    std::vector<std::vector<ReplicationMetrics>> per_rep(study.reps);
    parallel_for(study.reps, study.threads, [&](std::size_t r) {
      SimConfig cfg = base;
      cfg.seed = replication_seed(study.seed, r);
      per_rep[r] = run_replication(cfg, noise, study.estimators, study.options);
    });

    std::vector<std::vector<ReplicationMetrics>> by_est(ne, std::vector<ReplicationMetrics>(study.reps));
    for (std::size_t r = 0; r < study.reps; ++r)
      for (std::size_t e = 0; e < ne; ++e) by_est[e][r] = per_rep[r][e];

    for (std::size_t e = 0; e < ne; ++e) {
      std::vector<double> dr, dc, df;
      for (const auto& m : by_est[e]) {
        dr.push_back(m.d_row);
        dc.push_back(m.d_col);
        df.push_back(m.d_vec_factor);
      }
      const auto row = [&](const char* metric, const std::vector<double>& v) {
        res.rows.push_back({study.scenario, base.t_len, base.p1, base.p2, study.estimators[e], metric,
                            replication_summary(v), study.reps});
      };
      row("D_R", dr);
      row("D_C", dc);
      row("D_vecF", df);
    }
    res.metrics.push_back(std::move(by_est));
  }
  return res;
}

/// CSV with columns scenario,T,p1,p2,estimator,metric,mean,sd,reps.
inline std::string format_report(const std::vector<ReportRow>& rows) {
  std::string out = "scenario,T,p1,p2,estimator,metric,mean,sd,reps\n";
  for (const ReportRow& r : rows) {
    out += to_char(r.scenario);
    out += ',' + std::to_string(r.t_len) + ',' + std::to_string(r.p1) + ',' + std::to_string(r.p2) + ',';
    out += to_string(r.estimator);
    out += ',' + r.metric + ',' + io::format_double(r.summary.mean) + ',' + io::format_double(r.summary.sd) + ',' +
           std::to_string(r.reps) + '\n';
  }
  return out;
}

struct RollingOptions {
  std::size_t window = 60;
  std::size_t eval = 12;
  Estimator estimator = Estimator::Rpils;
  EstimatorOptions options;
  std::uint64_t seed = 0;  ///< weight seed, reused for every window
};

struct RollingWindow {
  std::size_t train_start = 0;
  std::size_t eval_start = 0;
  RollingStats stats;
  std::optional<double> variation;  ///< absent for the first window
  LoadingPair loadings;
};

struct RollingReport {
  std::vector<RollingWindow> windows;
  double mean_mse = 0.0;
  double mean_rho = 0.0;
  double mean_variation = std::nan("");  ///< NaN when there is a single window
};

/// Ŷ = R (Rᵀ Y C / (p1 p2)) Cᵀ for each held-out slice, with the loadings frozen.
inline MatrixPanel reconstruct(const MatrixPanel& observed, const LoadingPair& loadings) {
  return common_components(loadings, project_factors(observed, loadings.r, loadings.c));
}

inline MatrixPanel slice_range(const MatrixPanel& panel, std::size_t begin, std::size_t count) {
  MatrixPanel out(panel.p1, panel.p2, {});
  out.slices.assign(panel.slices.begin() + static_cast<std::ptrdiff_t>(begin),
                    panel.slices.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return out;
}

/// Fit on `window` slices, evaluate on the next `eval`, advance by `eval`.
inline RollingReport rolling_validate(const MatrixPanel& panel, const RollingOptions& o) {
  validate_panel(panel);
  if (o.window < 1 || o.eval < 1) throw Error(ErrorCode::BadConfig, "window and eval must be positive");
  if (o.window + o.eval > panel.t_len())
    throw Error(ErrorCode::BadConfig, "window + eval = " + std::to_string(o.window + o.eval) + " exceeds T = " +
                                          std::to_string(panel.t_len()));
  RollingReport rep;
  double sum_v = 0.0;
  std::size_t n_v = 0;
  for (std::size_t start = 0; start + o.window + o.eval <= panel.t_len(); start += o.eval) {
    const MatrixPanel train = slice_range(panel, start, o.window);
    const MatrixPanel test = slice_range(panel, start + o.window, o.eval);
    FitResult fit = fit_estimator(train, o.estimator, o.options, o.seed);
    RollingWindow w;
    w.train_start = start;
    w.eval_start = start + o.window;
    w.stats = rolling_stats(test, reconstruct(test, fit.loadings));
    if (!rep.windows.empty()) {
      w.variation = loading_variation(fit.loadings, rep.windows.back().loadings);
      sum_v += *w.variation;
      ++n_v;
    }
    w.loadings = std::move(fit.loadings);
    rep.mean_mse += w.stats.mse;
    rep.mean_rho += w.stats.rho;
    rep.windows.push_back(std::move(w));
  }
  rep.mean_mse /= static_cast<double>(rep.windows.size());
  rep.mean_rho /= static_cast<double>(rep.windows.size());
  if (n_v > 0) rep.mean_variation = sum_v / static_cast<double>(n_v);
  return rep;
}

/// CSV: window,train_start,eval_start,mse,rho,v  followed by a "mean" row.
inline std::string format_rolling(const RollingReport& rep) {
  std::string out = "window,train_start,eval_start,mse,rho,v\n";
  for (std::size_t k = 0; k < rep.windows.size(); ++k) {
    const RollingWindow& w = rep.windows[k];
    out += std::to_string(k) + ',' + std::to_string(w.train_start) + ',' + std::to_string(w.eval_start) + ',' +
           io::format_double(w.stats.mse) + ',' + io::format_double(w.stats.rho) + ',' +
           (w.variation ? io::format_double(*w.variation) : std::string()) + '\n';
  }
  out += "mean,,," + io::format_double(rep.mean_mse) + ',' + io::format_double(rep.mean_rho) + ',' +
         (std::isnan(rep.mean_variation) ? std::string() : io::format_double(rep.mean_variation)) + '\n';
  return out;
}

}  // namespace matfac
