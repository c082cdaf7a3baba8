#pragma once

// Command-line driver. Kept in a header so the test suite can call run()
// in-process; tools/matfac.cpp only forwards main() here.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "matfac/matfac.hpp"

namespace matfac::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for flag combinations that only fail validation after parsing.
struct UsageError {
  std::string message;
};

/// --threads when given, else MATFAC_THREADS, else 1.
inline std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag) return std::max<std::size_t>(1, *flag);
  if (const char* env = std::getenv("MATFAC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw UsageError{"MATFAC_THREADS must be a positive integer, got '" + std::string(env) + "'"};
  }
  return 1;
}

inline DeltaMode parse_delta_mode(const std::string& s) {
  return s == "relative" ? DeltaMode::Relative : DeltaMode::Absolute;
}

struct CommonFitFlags {
  std::string estimator = "rpils";
  std::size_t m1 = 3;
  std::size_t m2 = 3;
  double epsilon = 1e-6;
  std::size_t max_iter = 100;
  std::string delta_mode = "absolute";
  std::uint64_t seed = 0;

  void attach(CLI::App& app) {
    app.add_option("--estimator", estimator, "rpils | ose1 | ose2 | alpha-pca")
        ->check(CLI::IsMember({"rpils", "ose1", "ose2", "alpha-pca"}))
        ->capture_default_str();
    app.add_option("--m1", m1, "working number of row factors")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--m2", m2, "working number of column factors")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--epsilon", epsilon, "convergence threshold")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--max-iter", max_iter, "iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--delta-mode", delta_mode, "absolute | relative")
        ->check(CLI::IsMember({"absolute", "relative"}))
        ->capture_default_str();
    app.add_option("--seed", seed, "base seed")->capture_default_str();
  }

  EstimatorOptions options() const {
    return {m1, m2, epsilon, max_iter, parse_delta_mode(delta_mode)};
  }
  Estimator est() const { return *parse_estimator(estimator); }
};

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

inline void require_fits(const MatrixPanel& panel, std::size_t m1, std::size_t m2) {
  if (m1 > panel.p1 || m2 > panel.p2)
    throw UsageError{"BadDims: m1=" + std::to_string(m1) + ", m2=" + std::to_string(m2) + " exceed panel " +
                     std::to_string(panel.p1) + "x" + std::to_string(panel.p2)};
}

struct ReplicateCmd {
  std::string scenario = "A";
  CommonFitFlags fit;
  std::size_t reps = 500;
  std::string out;
  std::vector<std::size_t> t_values;
  std::optional<std::size_t> threads;

  void attach(CLI::App& app) {
    app.add_option("--scenario", scenario, "A | B")->check(CLI::IsMember({"A", "B"}))->capture_default_str();
    fit.attach(app);
    app.add_option("--reps", reps, "replications per grid configuration")->capture_default_str();
    app.add_option("--out", out, "report CSV (stdout when omitted)");
    app.add_option("--t-values", t_values, "restrict the grid to these T values")->delimiter(',');
    app.add_option("--threads", threads, "worker threads (default: MATFAC_THREADS or 1)");
  }

  int run(std::ostream& out_stream) const {
    if (reps < 1) throw UsageError{"BadArgs: --reps must be at least 1"};
    ReplicationStudy study;
    study.scenario = scenario == "A" ? Scenario::A : Scenario::B;
    study.estimators = {fit.est()};
    study.reps = reps;
    study.seed = fit.seed;
    study.options = fit.options();
    study.t_values = t_values;
    study.threads = resolve_threads(threads);
    for (const SimConfig& c : scenario_grid(study.scenario))
      if (fit.m1 > c.p1 || fit.m2 > c.p2)
        throw UsageError{"BadDims: working factor numbers exceed the grid dimensions"};
    std::vector<std::size_t> known;
    for (const SimConfig& c : scenario_grid(study.scenario)) known.push_back(c.t_len);
    for (std::size_t t : t_values)
      if (std::find(known.begin(), known.end(), t) == known.end())
        throw UsageError{"BadArgs: T=" + std::to_string(t) + " is not on the scenario grid"};
    const StudyResult res = run_study(study);
    write_text(out, format_report(res.rows), out_stream);
    return kExitOk;
  }
};

struct FitCmd {
  std::string input;
  std::string out_dir;
  CommonFitFlags fit;
  std::string init = "gaussian";
  bool varimax_loadings = false;

  void attach(CLI::App& app) {
    app.add_option("--input", input, "panel CSV (t,i,j,value)")->required();
    app.add_option("--out-dir", out_dir, "directory for loadings, factors and fit.json")->required();
    fit.attach(app);
    app.add_option("--init", init, "rpils initial weights: gaussian | hadamard | alpha-pca")
        ->check(CLI::IsMember({"gaussian", "hadamard", "alpha-pca"}))
        ->capture_default_str();
    app.add_flag("--varimax", varimax_loadings, "varimax-rotate loadings before writing");
  }

  int run(std::ostream&) const {
    const MatrixPanel panel = io::read_panel_csv(input);
    require_fits(panel, fit.m1, fit.m2);
    const EstimatorOptions o = fit.options();
    const Estimator est = fit.est();

    FitResult res;
    std::string init_used = "none";
    switch (est) {
      case Estimator::Rpils: {
        InitSpec spec = GaussianInit{fit.seed};
        if (init == "hadamard") spec = HadamardInit{};
        if (init == "alpha-pca") spec = AlphaPcaInit{};
        init_used = init;
        res = rpils_fit(panel, rpils_config(o, spec));
        break;
      }
      case Estimator::Ose1:
        init_used = "gaussian";
        res = fit_estimator(panel, est, o, fit.seed);
        break;
      case Estimator::Ose2:
        init_used = "alpha-pca";
        res = fit_estimator(panel, est, o, fit.seed);
        break;
      case Estimator::AlphaPca: res = fit_estimator(panel, est, o, fit.seed); break;
    }

    Matrix r = res.loadings.r;
    Matrix c = res.loadings.c;
    if (varimax_loadings) {
      r = varimax_rotate(r);
      c = varimax_rotate(c);
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir + "': " + ec.message());
    const std::filesystem::path dir(out_dir);
    io::write_matrix_csv(r, (dir / "loadings_r.csv").string());
    io::write_matrix_csv(c, (dir / "loadings_c.csv").string());
    io::write_factors_csv(res.factors, (dir / "factors.csv").string());

    nlohmann::ordered_json j;
    j["estimator"] = fit.estimator;
    j["init"] = init_used;
    j["seed"] = fit.seed;
    j["m1"] = fit.m1;
    j["m2"] = fit.m2;
    j["epsilon"] = fit.epsilon;
    j["max_iter"] = fit.max_iter;
    j["delta_mode"] = fit.delta_mode;
    j["varimax"] = varimax_loadings;
    j["t_len"] = panel.t_len();
    j["p1"] = panel.p1;
    j["p2"] = panel.p2;
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;
    j["delta_trace"] = res.delta_trace;
    j["elapsed_seconds"] = res.elapsed_seconds;
    write_text((dir / "fit.json").string(), j.dump(2) + "\n", std::cout);
    return kExitOk;
  }
};

struct RollingCmd {
  std::string input;
  std::size_t window = 60;
  std::size_t eval = 12;
  CommonFitFlags fit;
  std::string out;

  void attach(CLI::App& app) {
    app.add_option("--input", input, "panel CSV, slices in time order")->required();
    app.add_option("--window", window, "training slices per window")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--eval", eval, "evaluation slices per window, also the step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit.attach(app);
    app.add_option("--out", out, "report CSV (stdout when omitted)");
  }

  int run(std::ostream& out_stream) const {
    const MatrixPanel panel = io::read_panel_csv(input);
    if (window + eval > panel.t_len())
      throw UsageError{"BadArgs: window + eval = " + std::to_string(window + eval) + " exceeds T = " +
                       std::to_string(panel.t_len())};
    require_fits(panel, fit.m1, fit.m2);
    RollingOptions o;
    o.window = window;
    o.eval = eval;
    o.estimator = fit.est();
    o.options = fit.options();
    o.seed = fit.seed;
    write_text(out, format_rolling(rolling_validate(panel, o)), out_stream);
    return kExitOk;
  }
};

struct SimulateCmd {
  SimConfig cfg;
  std::string out;
  bool signal_only = false;

  void attach(CLI::App& app) {
    app.add_option("--t", cfg.t_len, "number of slices T")->capture_default_str();
    app.add_option("--p1", cfg.p1, "rows")->capture_default_str();
    app.add_option("--p2", cfg.p2, "columns")->capture_default_str();
    app.add_option("--k1", cfg.k1, "true row factors")->capture_default_str();
    app.add_option("--k2", cfg.k2, "true column factors")->capture_default_str();
    app.add_option("--phi", cfg.phi, "factor AR(1) coefficient")->capture_default_str();
    app.add_option("--psi", cfg.psi, "noise AR(1) coefficient")->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed")->capture_default_str();
    app.add_option("--burn-in", cfg.burn_in, "AR burn-in steps")->capture_default_str();
    app.add_option("--out", out, "panel CSV")->required();
    app.add_flag("--signal-only", signal_only, "write R F_t Cᵀ without noise");
  }

  int run(std::ostream&) const {
    try {
      validate_sim_config(cfg);
    } catch (const Error& e) {
      throw UsageError{e.what()};
    }
    const SimulatedPanel sim = simulate_panel(cfg);
    io::write_panel_csv(signal_only ? signal_panel(sim.truth) : sim.panel, out);
    return kExitOk;
  }
};

/// Entry point. Exit 0 on success, 2 on bad flags, 1 on runtime failure;
/// every error line on `err` starts with a stable code token.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Matrix factor model estimation by random-projection iterative least squares"};
  app.require_subcommand(1);
  ReplicateCmd replicate;
  FitCmd fit;
  RollingCmd rolling;
  SimulateCmd simulate;
  replicate.attach(*app.add_subcommand("replicate", "Monte Carlo study over a scenario grid"));
  fit.attach(*app.add_subcommand("fit", "fit one panel and write loadings, factors and fit.json"));
  rolling.attach(*app.add_subcommand("rolling", "rolling-window validation on one panel"));
  simulate.attach(*app.add_subcommand("simulate", "draw a panel from the simulation design"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << app.help();
      return kExitOk;
    }
    err << "BadArgs: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("replicate")) return replicate.run(out);
    if (app.got_subcommand("fit")) return fit.run(out);
    if (app.got_subcommand("rolling")) return rolling.run(out);
    return simulate.run(out);
  } catch (const UsageError& e) {
    err << (e.message.find(':') == std::string::npos ? "BadArgs: " : "") << e.message << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "Internal: " << e.what() << "\n";
    return kExitRuntime;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"matfac"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace matfac::cli
