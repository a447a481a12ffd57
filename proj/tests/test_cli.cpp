#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("homog_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Exit status of the CLI; stdout and stderr land in dir_/stdout, dir_/stderr.
  int run(const std::string& args) const {
    const std::string cmd = "env -u HOMOG_OUTPUT_DIR -u HOMOG_THREADS " +
                            std::string(HOMOG_CLI_PATH) + " " + args + " > " +
                            (dir_ / "stdout").string() + " 2> " + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out_dir(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  }

  std::string stdout_text() const { return slurp(dir_ / "stdout"); }
  std::string stderr_text() const { return slurp(dir_ / "stderr"); }

  static std::vector<std::vector<std::string>> csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::istringstream row(line);
      std::string cell;
      while (std::getline(row, cell, ',')) cells.push_back(cell);
      rows.push_back(cells);
    }
    return rows;
  }

  /// Drops the named column from every row.
  static void drop_column(std::vector<std::vector<std::string>>& rows, const std::string& name) {
    const auto& header = rows.front();
    const auto at = std::find(header.begin(), header.end(), name) - header.begin();
    ASSERT_LT(static_cast<std::size_t>(at), header.size());
    for (auto& row : rows) row.erase(row.begin() + at);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, LaminateSolveReportsHarmonicMean) {
  const std::string out = out_dir("lam");
  ASSERT_EQ(run("solve -s dim=1 -s microstructure=laminate -s nref=16 -s green=consistent "
                "-s rel_tol=1e-12 -s output_dir=" + out),
            0)
      << stderr_text();
  const auto rows = csv(slurp(fs::path(out) / "solve.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].back(), "A_0");
  EXPECT_NEAR(std::stod(rows[1].back()), 1.6, 1e-10);
  EXPECT_TRUE(fs::exists(fs::path(out) / "config.resolved"));
  const std::string resolved = slurp(fs::path(out) / "config.resolved");
  EXPECT_NE(resolved.find("consistent.n_max=4\n"), std::string::npos);
  EXPECT_NE(resolved.find("reference=a=0.5\n"), std::string::npos);
}

TEST_F(Cli, SolveIsDeterministicApartFromTiming) {
  const std::string args =
      "solve -s microstructure=random -s nref=16 -s random.seed=7 -s rel_tol=1e-8 ";
  ASSERT_EQ(run(args + "-s output_dir=" + out_dir("a")), 0) << stderr_text();
  ASSERT_EQ(run(args + "-s output_dir=" + out_dir("b")), 0) << stderr_text();
  auto a = csv(slurp(fs::path(out_dir("a")) / "solve.csv"));
  auto b = csv(slurp(fs::path(out_dir("b")) / "solve.csv"));
  drop_column(a, "wall_time_s");
  drop_column(b, "wall_time_s");
  EXPECT_EQ(a, b);
  auto ra = csv(slurp(fs::path(out_dir("a")) / "config.resolved"));
  auto rb = csv(slurp(fs::path(out_dir("b")) / "config.resolved"));
  std::erase_if(ra, [](const auto& r) { return r[0].rfind("output_dir=", 0) == 0; });
  std::erase_if(rb, [](const auto& r) { return r[0].rfind("output_dir=", 0) == 0; });
  EXPECT_EQ(ra, rb);
}

TEST_F(Cli, UnconvergedSolveExitsWithTwo) {
  EXPECT_EQ(run("solve -s nref=16 -s rel_tol=1e-14 -s max_iter=2 -s output_dir=" +
                out_dir("u")),
            2);
  EXPECT_NE(stderr_text().find("did not converge"), std::string::npos);
  // The partial report is still written.
  EXPECT_TRUE(fs::exists(fs::path(out_dir("u")) / "solve.csv"));
}

TEST_F(Cli, InvalidConfigurationExitsWithOne) {
  EXPECT_EQ(run("solve -s colour=red -s output_dir=" + out_dir("x")), 1);
  EXPECT_NE(stderr_text().find("colour"), std::string::npos);
  EXPECT_EQ(run("solve -s dim=2 -s loading=axis:z -s output_dir=" + out_dir("x")), 1);
}

TEST_F(Cli, InfeasiblePackExitsWithOne) {
  EXPECT_EQ(run("generate --n 100000 --r 0.2 --out " + out_dir("g")), 1);
  EXPECT_NE(stderr_text().find("error"), std::string::npos);
}

TEST_F(Cli, EmptyPackIsValid) {
  ASSERT_EQ(run("generate --n 0 --r 0.1 --nref 8 --out " + out_dir("g")), 0) << stderr_text();
  EXPECT_NE(stdout_text().find("spheres=0"), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(out_dir("g")) / "pack.txt"));
  EXPECT_TRUE(fs::exists(fs::path(out_dir("g")) / "phases.vox"));
}

TEST_F(Cli, GenerateThenVoxelizeAgree) {
  ASSERT_EQ(run("generate --n 10 --r 0.1 --seed 3 --nref 16 --out " + out_dir("g")), 0)
      << stderr_text();
  ASSERT_EQ(run("voxelize --pack " + out_dir("g") + "/pack.txt --nref 16 --out " + out_dir("v")),
            0)
      << stderr_text();
  EXPECT_EQ(slurp(fs::path(out_dir("g")) / "phases.vox"),
            slurp(fs::path(out_dir("v")) / "phases.vox"));
}

TEST_F(Cli, SweepWritesRateAndRejectsSinglePoint) {
  const std::string base = "sweep -s nref=64 -s rel_tol=1e-8 ";
  ASSERT_EQ(run(base + "-s Ns=16,32,64 --oracle 2 -s output_dir=" + out_dir("s")), 0)
      << stderr_text();
  const auto rows = csv(slurp(fs::path(out_dir("s")) / "sweep.csv"));
  EXPECT_EQ(rows.size(), 4u);
  EXPECT_TRUE(fs::exists(fs::path(out_dir("s")) / "rate.txt"));
  EXPECT_EQ(run(base + "-s Ns=16 -s output_dir=" + out_dir("t")), 1);
  EXPECT_NE(stderr_text().find("degenerate"), std::string::npos);
}

TEST_F(Cli, BenchReplayOfPerfectScalingGivesUnitEfficiency) {
  {
    std::ofstream t(dir_ / "timings.csv");
    t << "N,P,iterations,T_P\n32,1,10,4.0\n32,2,10,2.0\n32,4,10,1.0\n";
  }
  ASSERT_EQ(run("bench --replay " + (dir_ / "timings.csv").string() + " -s output_dir=" +
                out_dir("b")),
            0)
      << stderr_text();
  const auto rows = csv(slurp(fs::path(out_dir("b")) / "bench.csv"));
  ASSERT_EQ(rows.size(), 4u);
  ASSERT_EQ(rows[0][4], "E");
  // E is left empty for the single-thread baseline.
  EXPECT_EQ(rows[1][4], "");
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_DOUBLE_EQ(std::stod(rows[i][4]), 1.0);
}

TEST_F(Cli, EnvironmentSelectsOutputDirectory) {
  const std::string cmd = "HOMOG_OUTPUT_DIR=" + out_dir("env") + " " +
                          std::string(HOMOG_CLI_PATH) +
                          " solve -s dim=1 -s microstructure=laminate -s nref=8 > /dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(fs::path(out_dir("env")) / "solve.csv"));
}
