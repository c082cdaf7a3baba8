#include <gtest/gtest.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "matfac/harness.hpp"
#include "matfac/io.hpp"
#include "matfac_cli.hpp"
#include "oracles.hpp"

namespace matfac {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("matfac_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode read_error(const std::string& path) {
  try {
    io::read_panel_csv(path);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::Io;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string first_word(const std::string& s) { return s.substr(0, s.find_first_of(" \n")); }

TEST(PanelCsv, SingleCell) {
  TempDir d;
  write_file(d.file("p.csv"), "t,i,j,value\n0,0,0,2.5\n");
  const MatrixPanel p = io::read_panel_csv(d.file("p.csv"));
  ASSERT_EQ(p.t_len(), 1u);
  EXPECT_EQ(p.p1, 1u);
  EXPECT_EQ(p.p2, 1u);
  EXPECT_EQ(p[0](0, 0), 2.5);
}

TEST(PanelCsv, Errors) {
  TempDir d;
  write_file(d.file("missing.csv"), "# matfac-panel v1 T=1 p1=2 p2=1\nt,i,j,value\n0,0,0,1\n");
  EXPECT_EQ(read_error(d.file("missing.csv")), ErrorCode::MissingCell);
  write_file(d.file("gap.csv"), "t,i,j,value\n0,0,0,1\n0,1,1,1\n");
  EXPECT_EQ(read_error(d.file("gap.csv")), ErrorCode::MissingCell);
  write_file(d.file("dup.csv"), "t,i,j,value\n0,0,0,1\n0,0,0,2\n");
  EXPECT_EQ(read_error(d.file("dup.csv")), ErrorCode::DuplicateCell);
  write_file(d.file("header.csv"), "a,b,c,d\n0,0,0,1\n");
  EXPECT_EQ(read_error(d.file("header.csv")), ErrorCode::Parse);
  write_file(d.file("value.csv"), "t,i,j,value\n0,0,0,abc\n");
  EXPECT_EQ(read_error(d.file("value.csv")), ErrorCode::Parse);
  write_file(d.file("fields.csv"), "t,i,j,value\n0,0,1\n");
  EXPECT_EQ(read_error(d.file("fields.csv")), ErrorCode::Parse);
  write_file(d.file("neg.csv"), "t,i,j,value\n0,-1,0,1\n");
  EXPECT_EQ(read_error(d.file("neg.csv")), ErrorCode::Parse);
  write_file(d.file("nan.csv"), "t,i,j,value\n0,0,0,nan\n");
  const ErrorCode nan_code = read_error(d.file("nan.csv"));
  EXPECT_TRUE(nan_code == ErrorCode::NonFinite || nan_code == ErrorCode::Parse);
  EXPECT_EQ(read_error(d.file("absent.csv")), ErrorCode::Io);
  try {
    io::write_panel_csv(MatrixPanel::zeros(1, 1, 1), "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(PanelCsv, ParseErrorNamesLine) {
  TempDir d;
  write_file(d.file("bad.csv"), "t,i,j,value\n0,0,0,1\n0,1,0,x\n");
  try {
    io::read_panel_csv(d.file("bad.csv"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

TEST(PanelCsv, RoundTrip) {
  TempDir d;
  SimConfig cfg;
  cfg.t_len = 5;
  cfg.p1 = 4;
  cfg.p2 = 3;
  cfg.seed = 21;
  const MatrixPanel p = simulate_panel(cfg).panel;
  io::write_panel_csv(p, d.file("a.csv"));
  const MatrixPanel q = io::read_panel_csv(d.file("a.csv"));
  EXPECT_EQ(p.slices, q.slices);
  io::write_panel_csv(q, d.file("b.csv"));
  EXPECT_EQ(read_file(d.file("a.csv")), read_file(d.file("b.csv")));
}

TEST(MatrixCsv, RoundTrip) {
  TempDir d;
  const Matrix m = testing::random_matrix(6, 3, 4);
  io::write_matrix_csv(m, d.file("m.csv"));
  EXPECT_EQ(io::read_matrix_csv(d.file("m.csv")), m);
}

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    const std::string s = io::format_double(v);
    double back = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(res.ec, std::errc{});
    EXPECT_EQ(back, v) << s;
  }
}

TEST(Cli, ExitCodes) {
  TempDir d;
  CliResult r = cli({"replicate", "--reps", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(first_word(r.err), "BadArgs:");

  ASSERT_EQ(cli({"simulate", "--t", "30", "--out", d.file("p.csv")}).code, 0);
  r = cli({"fit", "--input", d.file("p.csv"), "--out-dir", d.file("o"), "--m1", "25"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(first_word(r.err), "BadDims:");

  r = cli({"rolling", "--input", d.file("p.csv"), "--window", "25", "--eval", "6"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(first_word(r.err), "BadArgs:");

  r = cli({"fit", "--input", d.file("absent.csv"), "--out-dir", d.file("o")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(first_word(r.err), "Io:");

  r = cli({"nonsense"});
  EXPECT_EQ(r.code, 2);
  r = cli({"replicate", "--estimator", "pca"});
  EXPECT_EQ(r.code, 2);
  r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
}

TEST(Cli, ReplicateIsReproducibleAcrossThreads) {
  const std::vector<std::string> args{"replicate", "--scenario", "A", "--reps", "6", "--t-values", "20", "--seed", "3"};
  const CliResult a = cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(cli(args).out, a.out);
  ::setenv("MATFAC_THREADS", "4", 1);
  const CliResult b = cli(args);
  ::unsetenv("MATFAC_THREADS");
  EXPECT_EQ(b.out, a.out);
  auto with_flag = args;
  with_flag.insert(with_flag.end(), {"--threads", "3"});
  EXPECT_EQ(cli(with_flag).out, a.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "scenario,T,p1,p2,estimator,metric,mean,sd,reps");
}

TEST(Cli, FitOnNoiselessExport) {
  TempDir d;
  ASSERT_EQ(cli({"simulate", "--t", "20", "--p1", "15", "--p2", "12", "--seed", "8", "--signal-only", "--out",
                 d.file("s.csv")})
                .code,
            0);
  const CliResult r = cli({"fit", "--input", d.file("s.csv"), "--out-dir", d.file("o"), "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(d.file("o/fit.json")));
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_LE(j["iterations"].get<int>(), 5);
  EXPECT_EQ(j["p1"].get<int>(), 15);
  EXPECT_EQ(j["estimator"].get<std::string>(), "rpils");
  const Matrix rl = io::read_matrix_csv(d.file("o/loadings_r.csv"));
  const Matrix cl = io::read_matrix_csv(d.file("o/loadings_c.csv"));
  EXPECT_EQ(rl.rows(), 15u);
  EXPECT_EQ(cl.rows(), 12u);
  EXPECT_LE(testing::normalization_error(rl), 1e-8);
  EXPECT_LE(testing::normalization_error(cl), 1e-8);
  EXPECT_EQ(read_file(d.file("o/factors.csv")).substr(0, 12), "t,a,b,value\n");
}

TEST(Cli, FitVarimaxAndBaselines) {
  TempDir d;
  ASSERT_EQ(cli({"simulate", "--t", "20", "--seed", "9", "--out", d.file("p.csv")}).code, 0);
  for (const char* est : {"ose1", "ose2", "alpha-pca"}) {
    const CliResult r = cli({"fit", "--input", d.file("p.csv"), "--out-dir", d.file(est), "--estimator", est});
    EXPECT_EQ(r.code, 0) << r.err;
  }
  const CliResult v = cli({"fit", "--input", d.file("p.csv"), "--out-dir", d.file("vm"), "--varimax", "--init",
                           "hadamard"});
  ASSERT_EQ(v.code, 0) << v.err;
  const Matrix rl = io::read_matrix_csv(d.file("vm/loadings_r.csv"));
  EXPECT_LE(testing::normalization_error(rl), 1e-8);
}

TEST(Rolling, ReconstructionBeatsMean) {
  SimConfig cfg;
  cfg.t_len = 96;
  cfg.seed = 10;
  const MatrixPanel panel = simulate_panel(cfg).panel;
  RollingOptions o;
  const RollingReport rep = rolling_validate(panel, o);
  EXPECT_EQ(rep.windows.size(), 3u);
  EXPECT_LT(rep.mean_rho, 1.0);
  EXPECT_FALSE(rep.windows[0].variation.has_value());
  EXPECT_TRUE(rep.windows[1].variation.has_value());
  const std::string text = format_rolling(rep);
  EXPECT_EQ(text.substr(0, text.find('\n')), "window,train_start,eval_start,mse,rho,v");
}

TEST(Rolling, PeriodicPanelHasStableLoadings) {
  SimConfig cfg;
  cfg.t_len = 12;
  cfg.seed = 11;
  const MatrixPanel base = simulate_panel(cfg).panel;
  MatrixPanel panel(20, 20, {});
  for (int rep = 0; rep < 8; ++rep)
    for (const Matrix& m : base.slices) panel.slices.push_back(m);
  for (Estimator est : {Estimator::Rpils, Estimator::AlphaPca}) {
    RollingOptions o;
    o.estimator = est;
    const RollingReport rep = rolling_validate(panel, o);
    ASSERT_GE(rep.windows.size(), 2u);
    EXPECT_LE(rep.mean_variation, 1e-6);
  }
}

TEST(Rolling, CliWritesReport) {
  TempDir d;
  ASSERT_EQ(cli({"simulate", "--t", "84", "--seed", "12", "--out", d.file("p.csv")}).code, 0);
  const CliResult r = cli({"rolling", "--input", d.file("p.csv"), "--out", d.file("r.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = read_file(d.file("r.csv"));
  EXPECT_NE(text.find("\nmean,,,"), std::string::npos);
}

}  // namespace
}  // namespace matfac
