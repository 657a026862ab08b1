#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>
#include <sys/wait.h>

#include "thinfilm/io.hpp"

#ifdef THINFILM_CLI_PATH

using namespace thinfilm;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path& out_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "thinfilm_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string prefix(const std::string& name) { return (out_dir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string(THINFILM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

json manifest(const std::string& name) { return json::parse(slurp(prefix(name) + ".manifest.json")); }

int count_rows(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  int n = -1;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

const std::string kData = THINFILM_TEST_DATA;

}  // namespace

TEST(Cli, SolveMatchesGoldenProfile) {
  ASSERT_EQ(run("solve --omega 0.1 --q 0.01 --n-points 512 --tol 1e-15 --out " + prefix("golden")), 0);
  const PeriodicProfile got = io::read_profile_csv(prefix("golden") + ".profile.csv");
  const PeriodicProfile want = io::read_profile_csv(kData + "/profile_w0.1_q0.01_n512.csv");
  ASSERT_EQ(got.size(), want.size());
  EXPECT_LT((got.values - want.values).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(first_line(prefix("golden") + ".history.csv"), "iter,diff");

  const json m = manifest("golden");
  EXPECT_EQ(m["subcommand"], "solve");
  EXPECT_EQ(m["params"]["n_points"], 512);
  EXPECT_EQ(m["results"]["verdict"], "converged");
  EXPECT_EQ(m["outputs"].size(), 2u);
  EXPECT_TRUE(m.contains("timestamp"));
  EXPECT_TRUE(m.contains("tool_version"));
}

TEST(Cli, SolveIsDeterministic) {
  ASSERT_EQ(run("solve --omega 0.2 --q 0.001153 --n-points 256 --out " + prefix("det_a")), 0);
  ASSERT_EQ(run("solve --omega 0.2 --q 0.001153 --n-points 256 --out " + prefix("det_b")), 0);
  EXPECT_EQ(slurp(prefix("det_a") + ".profile.csv"), slurp(prefix("det_b") + ".profile.csv"));
  EXPECT_EQ(slurp(prefix("det_a") + ".history.csv"), slurp(prefix("det_b") + ".history.csv"));
}

TEST(Cli, SolveDiverges) {
  EXPECT_EQ(run("solve --omega 0.1 --q 0.1 --out " + prefix("div")), 2);
  EXPECT_EQ(manifest("div")["results"]["verdict"], "diverged");
}

TEST(Cli, SolveBudgetExhausted) {
  EXPECT_EQ(run("solve --omega 0.0192 --q 0.01 --n-points 128 --max-iters 3 --out " + prefix("budget")), 3);
}

TEST(Cli, SolveNewtonWithMass) {
  ASSERT_EQ(run("solve --method newton --omega 0.09 --mass 1.0 --n-points 128 --out " + prefix("newton")), 0);
  const json m = manifest("newton");
  EXPECT_NEAR(m["results"]["q_out"].get<double>(), 0.0114039, 1e-6);
  EXPECT_NEAR(m["results"]["mass"].get<double>(), 1.0, 1e-10);
}

TEST(Cli, SolveFromFileGuess) {
  ASSERT_EQ(run("solve --omega 0.1 --q 0.01 --n-points 256 --guess file:" + kData +
                "/profile_w0.1_q0.01_n512.csv --out " + prefix("fileguess")),
            0);
  EXPECT_LE(manifest("fileguess")["results"]["iterations"].get<int>(), 3);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 64);
  EXPECT_EQ(run("solve --q 0.01"), 64);
  EXPECT_EQ(run("solve --omega 0.1 --q 0.01 --mass 1"), 64);
  EXPECT_EQ(run("solve --omega 0.1 --q 0.01 --method magic"), 64);
  EXPECT_EQ(run("solve --omega 0.1 --q 0.01 --n-points 7"), 64);
  EXPECT_EQ(run("solve --omega -1 --q 0.01"), 64);
  EXPECT_EQ(run("frobnicate"), 64);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, SweepRowsAndBisection) {
  ASSERT_EQ(run("sweep --q 1e-3 --omega-range 0.01:0.1:40 --n-points 256 --max-iters 300 --jobs 2 --out " +
                prefix("sweep")),
            0);
  const std::string csv = prefix("sweep") + ".sweep.csv";
  EXPECT_EQ(first_line(csv), "q,omega,verdict,iterations,u_min,u_max,mass");
  EXPECT_EQ(count_rows(csv), 40);

  ASSERT_EQ(run("sweep --q 1e-3 --omega-range 0.015:0.075:3 --bisect --out " + prefix("bisect")), 0);
  const json m = manifest("bisect");
  EXPECT_DOUBLE_EQ(m["results"]["omega_theoretical"].get<double>(), 0.015);
  const double w = m["results"]["omega_empirical"].get<double>();
  EXPECT_GE(w, 0.015);
  EXPECT_LE(w, 0.045);
}

TEST(Cli, SweepDeterministicAcrossJobs) {
  ASSERT_EQ(run("sweep --q 1e-3 --omega-range 0.01:0.2:6 --log-spacing --n-points 128 --jobs 1 --out " +
                prefix("j1")),
            0);
  ASSERT_EQ(run("sweep --q 1e-3 --omega-range 0.01:0.2:6 --log-spacing --n-points 128 --jobs 3 --out " +
                prefix("j3")),
            0);
  EXPECT_EQ(slurp(prefix("j1") + ".sweep.csv"), slurp(prefix("j3") + ".sweep.csv"));
}

TEST(Cli, SweepInvalidRanges) {
  EXPECT_EQ(run("sweep --q 1e-3 --omega-range 0.1:0.01:5"), 64);
  EXPECT_EQ(run("sweep --q 1e-3 --omega-range 0.1:0.2:0"), 64);
  EXPECT_EQ(run("sweep --q 1e-3 --omega-range nonsense"), 64);
  EXPECT_EQ(run("sweep --omega-range 0.1:0.2:3"), 64);
}

TEST(Cli, StabilityFromProfile) {
  const std::string profile = kData + "/mass1_w0.09_n256.csv";
  const std::string q = "0.011403920782745356";
  ASSERT_EQ(run("stability --profile " + profile + " --omega 0.09 --q " + q + " --n-points 256 --out " +
                prefix("stab256")),
            0);
  const json m = manifest("stab256");
  EXPECT_NEAR(m["results"]["dominant_modulus"].get<double>(), 1.01705919446, 2e-7);
  EXPECT_EQ(m["results"]["fate"], "repelling");
  EXPECT_EQ(first_line(prefix("stab256") + ".spectrum.csv"), "re,im");
  EXPECT_EQ(count_rows(prefix("stab256") + ".spectrum.csv"), 256);

  ASSERT_EQ(run("stability --profile " + profile + " --omega 0.09 --q " + q + " --n-points 16 --out " +
                prefix("stab16")),
            0);
  EXPECT_NEAR(manifest("stab16")["results"]["dominant_modulus"].get<double>(), 1.01711308844, 2e-7);

  ASSERT_EQ(run("stability --profile " + profile + " --omega 0.09 --q " + q + " --n-points 64 --dominant --out " +
                prefix("stabdom")),
            0);
  EXPECT_NEAR(manifest("stabdom")["results"]["dominant_modulus"].get<double>(), 1.01706, 1e-4);
}

TEST(Cli, StabilityOfConstantProfile) {
  const Grid g(32);
  const double w = 0.1, q = 0.01;
  const std::string path = prefix("flat.csv");
  io::write_profile_csv(path, PeriodicProfile(g, Eigen::VectorXd::Constant(32, q / w)));
  ASSERT_EQ(run("stability --profile " + path + " --omega 0.1 --q 0.01 --n-points 32 --out " + prefix("flat")), 0);
  EXPECT_EQ(manifest("flat")["results"]["dominant_modulus"].get<double>(), 0.0);
}

TEST(Cli, StabilityUnreadableProfile) {
  EXPECT_EQ(run("stability --profile " + prefix("missing.csv") + " --omega 0.1 --q 0.01"), 66);
}

TEST(Cli, ContinueFixedOmegaFindsBothSolutions) {
  ASSERT_EQ(run("continue --fix omega 0.09 --report-q 0.0114039 --out " + prefix("cont")), 0);
  const std::string csv = prefix("cont") + ".branch.csv";
  EXPECT_EQ(first_line(csv), "omega,q,mass,u_min,u_max");
  const json m = manifest("cont");
  ASSERT_GE(m["results"]["folds"].size(), 1u);
  const auto& sols = m["results"]["solutions_at_q"];
  ASSERT_EQ(sols.size(), 2u);
  double lo = std::min(sols[0]["mass"].get<double>(), sols[1]["mass"].get<double>());
  double hi = std::max(sols[0]["mass"].get<double>(), sols[1]["mass"].get<double>());
  EXPECT_NEAR(lo, 0.9128, 1e-3);
  EXPECT_NEAR(hi, 1.0, 1e-4);
}

TEST(Cli, ContinueFixedMassBelowBound) {
  ASSERT_EQ(run("continue --fix mass 1.0 --omega-min 1e-3 --out " + prefix("fixm")), 0);
  std::ifstream in(prefix("fixm") + ".branch.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    double w, q;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf", &w, &q), 2);
    EXPECT_LT(q, nonexistence_flux(w));
    ++rows;
  }
  EXPECT_GT(rows, 10);
}

TEST(Cli, ContinueUnreachableSeed) {
  EXPECT_EQ(run("continue --fix omega 0.09 --seed-q 0.5 --out " + prefix("noseed")), 65);
  EXPECT_EQ(run("continue --fix omega"), 64);
  EXPECT_EQ(run("continue --fix speed 3"), 64);
}

TEST(Cli, BenchTable) {
  ASSERT_EQ(run("bench --omega 0.2 --q 0.001153 --n-points 1024 --guesses twoqw sech --gammas -0.25 0 0.25 --out " +
                prefix("bench")),
            0);
  std::ifstream in(prefix("bench") + ".table1.csv");
  std::string header, twoqw, sech;
  std::getline(in, header);
  std::getline(in, twoqw);
  std::getline(in, sech);
  EXPECT_EQ(header, "guess,-0.25,0,0.25");
  int a, b, c;
  ASSERT_EQ(std::sscanf(twoqw.c_str(), "twoqw,%d,%d,%d", &a, &b, &c), 3);
  EXPECT_NEAR(b, 12, 2);
  EXPECT_LE(b, std::min(a, c) + 2);
  ASSERT_EQ(std::sscanf(sech.c_str(), "sech,%d,%d,%d", &a, &b, &c), 3);
  EXPECT_NEAR(b, 3, 2);
}

TEST(Cli, OutputDirectoryOverride) {
  const fs::path dir = out_dir() / "override";
  const std::string cmd = "THINFILM_OUTPUT_DIR=" + dir.string() + " " + THINFILM_CLI_PATH +
                          " solve --omega 0.2 --q 0.001153 --n-points 64 --out rel >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "rel.profile.csv"));
  EXPECT_TRUE(fs::exists(dir / "rel.manifest.json"));
}

#endif
