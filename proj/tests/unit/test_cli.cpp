#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rbmm/cli/commands.hpp"
#include "rbmm/cli/config.hpp"
#include "rbmm/cli/experiment.hpp"

namespace rbmm::cli {
namespace {

namespace fs = std::filesystem;

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("rbmm_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int tool(const std::string& args) {
  const std::string cmd = std::string(RBMM_TOOL) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Config, Defaults) {
  const RunConfig c = parse_config_text("application = quadratic-demo\n");
  EXPECT_EQ(c.application, Application::QuadraticDemo);
  EXPECT_EQ(c.surrogate, "proximal");
  EXPECT_EQ(c.max_cycles, 200);

  const RunConfig r = parse_config_text("application = rpca\nrows = 40\ncols = 64\n");
  EXPECT_EQ(r.rank, 2);
  EXPECT_DOUBLE_EQ(*r.sparsity, 1.0 / 8.0);
  EXPECT_EQ(r.max_cycles, 500);

  const RunConfig l = parse_config_text("application = optimistic-likelihood\n");
  EXPECT_EQ(l.dim, 10);
  EXPECT_EQ(l.max_cycles, 1000);

  const RunConfig cp = parse_config_text("application = cp-dictionary\ndims = 4x5x6\n");
  EXPECT_EQ(cp.dims, (std::vector<int>{4, 5, 6}));
  EXPECT_DOUBLE_EQ(cp.lambda_ratio, 0.5);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config_text("seed = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = nope\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = quadratic-demo\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = quadratic-demo\ndims = 3x3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = quadratic-demo\nmax_cycles = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = quadratic-demo\nlambda = abc\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = subspace-tracking\nsurrogate = exact\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = subspace-tracking\ndim = 5\nrank = 3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[section]\napplication = rpca\n"), ConfigError);
  EXPECT_THROW(parse_config_text("application = cp-dictionary\nfirst_factor = fixed-rank\nfactor_rank = 9\n"),
               ConfigError);
  EXPECT_THROW(parse_config_file("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, JsonEchoesResolvedValues) {
  const RunConfig c = parse_config_text("application = quadratic-demo\nseed = 9\ninit_a = 1.5\n");
  const auto j = c.to_json();
  EXPECT_EQ(j["application"], "quadratic-demo");
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["init_a"], 1.5);
  EXPECT_FALSE(j.contains("dims"));
}

TEST_F(Workspace, RunWritesTracesAndSummary) {
  RunConfig c = parse_config_text("application = quadratic-demo\ntrials = 2\nmax_cycles = 50\n");
  c.out_dir = out("run");
  std::ostringstream log;
  ASSERT_EQ(run_experiment(c, log), kOk) << log.str();
  EXPECT_TRUE(fs::exists(out("run/trace_0.csv")));
  EXPECT_TRUE(fs::exists(out("run/trace_1.csv")));
  const auto summary = nlohmann::json::parse(slurp(out("run/summary.json")));
  EXPECT_EQ(summary["trials"].size(), 2u);
  EXPECT_EQ(summary["trials"][1]["seed"], 1);
  EXPECT_NEAR(summary["trials"][0]["final_objective"].get<double>(), 1.0, 1e-9);
}

TEST_F(Workspace, TrialsRunInParallelDeterministically) {
  RunConfig c = parse_config_text("application = cp-dictionary\ndims = 6x5x4\nrank = 2\ntrials = 3\nmax_cycles = 20\n");
  c.threads = 3;
  const auto a = run_trials(c);
  c.threads = 1;
  const auto b = run_trials(c);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(a[t].run.trace.back().objective, b[t].run.trace.back().objective);
}

TEST_F(Workspace, ExitCodes) {
  const std::string ok = write("ok.ini", "application = quadratic-demo\nmax_cycles = 10\nout_dir = " + out("o1") + "\n");
  const std::string bad = write("bad.ini", "application = quadratic-demo\nwhat = 1\nout_dir = " + out("o2") + "\n");
  const std::string probe_fault = write("fault.ini", "application = quadratic-demo\nprobes = gradient\n"
                                                     "gradient_fault = 0.01\nout_dir = " + out("o3") + "\n");
  const std::string probe_ok = write("probe.ini", "application = quadratic-demo\nprobe_samples = 20\nout_dir = " +
                                                      out("o4") + "\n");
  EXPECT_EQ(tool("run --config " + ok), 0);
  EXPECT_TRUE(fs::exists(out("o1/summary.json")));
  EXPECT_EQ(tool("run --config " + bad), 2);
  EXPECT_FALSE(fs::exists(out("o2")));
  EXPECT_EQ(tool("run"), 2);
  EXPECT_EQ(tool("run --config " + out("missing.ini")), 2);
  EXPECT_EQ(tool("probe --config " + probe_fault), 1);
  EXPECT_EQ(tool("probe --config " + probe_ok), 0);
  const auto probes = nlohmann::json::parse(slurp(out("o4/probes.json")));
  EXPECT_TRUE(probes["pass"].get<bool>());
  EXPECT_EQ(tool("gen-data --config " + ok), 2);
  EXPECT_EQ(tool("run --config " + ok + " --seed 5 --out " + out("o5")), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(out("o5/summary.json")))["config"]["seed"], 5);
}

TEST_F(Workspace, NumericalFailureExitsThree) {
  // Two training samples in three dimensions give a singular nominal covariance.
  const std::string cfg = write("deg.ini", "application = optimistic-likelihood\ndim = 3\nsamples = 2\n"
                                           "train_samples = 2\nmax_cycles = 1\nout_dir = " + out("o") + "\n");
  RunConfig c = parse_config_file(cfg);
  std::ostringstream log;
  const int rc = run_experiment(c, log);
  EXPECT_EQ(rc, kNumericalError) << log.str();
}

TEST_F(Workspace, GenDataRoundTrips) {
  RunConfig c = parse_config_text("application = rpca\nrows = 6\ncols = 5\nrank = 1\n");
  c.out_dir = out("data");
  std::ostringstream log;
  ASSERT_EQ(generate_data(c, log), kOk);
  for (const char* name : {"observed", "low_rank", "sparse"}) {
    const io::DataArray b = io::read_binary(out(std::string("data/") + name + ".bin"));
    const io::DataArray t = io::read_csv(out(std::string("data/") + name + ".csv"));
    EXPECT_EQ(b.values, t.values);
    EXPECT_EQ(b.dims, (std::vector<std::uint32_t>{6, 5}));
  }
}

}  // namespace
}  // namespace rbmm::cli
