#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "seqmon/commands.hpp"
#include "seqmon/config.hpp"
#include "seqmon/error.hpp"
#include "seqmon/format.hpp"
#include "seqmon/record_io.hpp"
#include "seqmon/solvers.hpp"

using namespace seqmon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("seqmon_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "seqmon");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

ErrorCode config_code(const std::string& text) {
  try {
    resolve_config(parse_config(text));
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

// =============================================================================
// Formatting
// =============================================================================

TEST(Format, DoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Format, MatrixText) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4.5;
  EXPECT_EQ(format_matrix(m), "1 2; 3 4.5");
  EXPECT_TRUE(parse_matrix(format_matrix(m)) == m);
}

// =============================================================================
// Config
// =============================================================================

TEST(Config, DefaultsResolve) {
  const RunConfig c = resolve_config(parse_config(""));
  EXPECT_EQ(c.scenario, "damping");
  EXPECT_DOUBLE_EQ(c.params.at("gamma1"), 440.0);
  EXPECT_DOUBLE_EQ(c.dt, 1e-4);
}

TEST(Config, RoundTrip) {
  const std::string text = R"([scenario]
name = force
b1 = 4000

[test]
mode = weak
alpha0 = 0.02
alpha1 = 0.001

[run]
n_traj = 200
seed = 12345678901234
eps_list = 0.1, 0.05 0.01
)";
  const RunConfig a = resolve_config(parse_config(text));
  const RunConfig b = resolve_config(parse_config(emit_config(a)));
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.seed, 12345678901234u);
  EXPECT_EQ(a.eps_list.size(), 3u);
}

TEST(Config, CustomModelRoundTrip) {
  const std::string text = R"([scenario]
name = custom

[model0]
n_modes = 1
A = -1 0; 0 -1
b = 0 0
C = 1 0
D = 2 0; 0 2

[model1]
n_modes = 1
A = -2 0; 0 -2
b = 0 0
C = 1 0
D = 2 0; 0 2
)";
  const RunConfig a = resolve_config(parse_config(text));
  ASSERT_TRUE(a.model1.has_value());
  EXPECT_DOUBLE_EQ(a.model1->A(1, 1), -2.0);
  EXPECT_TRUE(resolve_config(parse_config(emit_config(a))) == a);
  EXPECT_NO_THROW(build_pair(a));
}

TEST(Config, Rejections) {
  EXPECT_EQ(config_code("[run]\nbogus = 1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("[nonsense]\nx = 1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("[run]\nn_traj = 3\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("[run]\nn_traj = many\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("[scenario]\nname = damping\nomega = 3\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("[scenario]\nname = custom\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("[run]\nseed = 1\nseed = 2\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("this is not ini\n"), ErrorCode::ConfigError);
}

TEST(Config, ErrorNamesLocation) {
  try {
    parse_config("[run]\nbogus = 1\n", "file.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("run.bogus"), std::string::npos);
  }
}

// =============================================================================
// Records
// =============================================================================

TEST(RecordIo, CsvAndBinaryRoundTrip) {
  const ExtendedSystem sys = build_steady_extended(preset_damping(100, 440, 10, 1, 1), 1);
  NoiseStream noise(1, 0, 1e-4);
  const MeasurementRecord rec = generate_record(sys, 0.01, 1e-4, noise).first;
  const fs::path csv = scratch("r.csv"), bin = scratch("r.bin");
  spit(csv, record_to_csv(rec));
  spit(bin, record_to_binary(rec));
  for (const MeasurementRecord& back : {read_record(csv.string()), read_record(bin.string())}) {
    ASSERT_EQ(back.dy.size(), rec.dy.size());
    EXPECT_EQ(back.meas_dim, 2);
    EXPECT_NEAR(back.dt, 1e-4, 1e-15);
    for (std::size_t i = 0; i < rec.dy.size(); ++i) EXPECT_TRUE(back.dy[i] == rec.dy[i]);
  }
}

TEST(RecordIo, TruncatedBinaryIsIoError) {
  const fs::path p = scratch("bad.bin");
  spit(p, std::string("SEQMREC1") + std::string(6, '\0'));
  try {
    read_record(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

// =============================================================================
// Command line
// =============================================================================

TEST(Cli, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(ErrorCode::ConfigError), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::DimensionMismatch), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::NoConvergence), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::NotHurwitz), 3);
}

TEST(Cli, PredictJson) {
  const fs::path out = scratch("predict.json");
  ASSERT_EQ(cli({"predict", "--scenario", "damping", "--out", out.string()}), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_NEAR(j["mu1"].get<double>(), 3.95757, 1e-4);
  EXPECT_NEAR(j["mu0"].get<double>(), 5.73047, 1e-4);
}

TEST(Cli, PredictIdenticalModelsWarns) {
  const fs::path cfg = scratch("same.ini"), out = scratch("same.json");
  spit(cfg, "[scenario]\nname = damping\ngamma1 = 100\n");
  ASSERT_EQ(cli({"predict", "--config", cfg.string(), "--out", out.string()}), 0);
  const std::string body = slurp(out);
  EXPECT_NE(body.find("warning"), std::string::npos);
}

TEST(Cli, MalformedConfigExitsTwo) {
  const fs::path cfg = scratch("bad.ini");
  spit(cfg, "[run]\nn_traj = -4\n");
  EXPECT_EQ(cli({"predict", "--config", cfg.string()}), 2);
  EXPECT_EQ(cli({"predict", "--config", scratch("missing.ini").string()}), 2);
  EXPECT_EQ(cli({"frobnicate"}), 2);
}

TEST(Cli, NumericalFailureExitsThree) {
  const fs::path cfg = scratch("unstable.ini");
  spit(cfg, R"([scenario]
name = custom
[model0]
A = 1 0; 0 1
b = 0 0
C = 0 0
D = 1 0; 0 1
[model1]
A = 1 0; 0 1
b = 0 0
C = 0 0
D = 2 0; 0 2
)");
  EXPECT_EQ(cli({"predict", "--config", cfg.string(), "--out", scratch("unstable.json").string()}), 3);
  EXPECT_FALSE(fs::exists(scratch("unstable.json")));
}

TEST(Cli, SweepIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path cfg = scratch("sweep.ini");
  spit(cfg, "[run]\nn_traj = 40\neps_list = 0.2 0.1\n");
  const fs::path a = scratch("a.csv"), b = scratch("b.csv");
  ASSERT_EQ(cli({"seq-sweep", "--config", cfg.string(), "--out", a.string(), "--threads", "1"}), 0);
  ASSERT_EQ(cli({"seq-sweep", "--config", cfg.string(), "--out", b.string(), "--threads", "3"}), 0);
  const std::string sa = slurp(a);
  EXPECT_EQ(sa, slurp(b));
  EXPECT_EQ(sa.substr(0, sa.find('\n')), "epsilon,a,n,n_undecided,tau_mean,tau_sem,err_point,err_ci_lo,err_ci_hi");
}

TEST(Cli, DetSweepHeader) {
  const fs::path out = scratch("det.csv");
  ASSERT_EQ(cli({"det-sweep", "--n-traj", "20", "--out", out.string()}), 0);
  const std::string s = slurp(out);
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,n,err_point,err_ci_lo,err_ci_hi");
}

TEST(Cli, RecordThenFilter) {
  const fs::path rec = scratch("cli.bin"), out = scratch("filter.json");
  ASSERT_EQ(cli({"record", "--true-k", "1", "--seed", "5", "--out", rec.string()}), 0);
  ASSERT_EQ(cli({"filter", "--input", rec.string(), "--format", "json", "--out", out.string()}), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_TRUE(j.contains("decision"));
}

TEST(Cli, IidRatio) {
  const fs::path out = scratch("iid.json");
  ASSERT_EQ(cli({"iid", "--scenario", "iid", "--epsilon", "0.001", "--format", "json", "--out", out.string()}), 0);
  EXPECT_NE(slurp(out).find("ratio"), std::string::npos);
}

TEST(Cli, ThreadPrecedence) {
  const fs::path cfg = scratch("threads.ini"), out = scratch("threads_out.ini");
  spit(cfg, "[run]\nthreads = 2\n");
  ::setenv("SEQMON_THREADS", "3", 1);
  ASSERT_EQ(cli({"config", "--config", cfg.string(), "--out", out.string()}), 0);
  EXPECT_EQ(resolve_config(parse_config(slurp(out))).threads, 3);
  ASSERT_EQ(cli({"config", "--config", cfg.string(), "--threads", "4", "--out", out.string()}), 0);
  EXPECT_EQ(resolve_config(parse_config(slurp(out))).threads, 4);
  ::unsetenv("SEQMON_THREADS");
}
