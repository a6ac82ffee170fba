#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fpwalk/approx.hpp"
#include "fpwalk/csv.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fpwalk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(FPWALK_CLI) + " " + args + " >" + (dir_ / "stdout.txt").string() + " 2>" +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.starts_with("#")) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

TEST_F(Cli, ExactLazyWalk) {
  write("lazy.json", R"({"offsets":[-1,0,1],"probs":[0.25,0.5,0.25]})");
  ASSERT_EQ(run("exact --dist " + out("lazy.json") + " --x 1 --n 2 --out " + out("o")), 0);
  const auto ladder = slurp(out("o/ladder.csv"));
  EXPECT_NE(ladder.find("survival_prob,0.625\n"), std::string::npos) << ladder;
  EXPECT_TRUE(fs::exists(out("o/survival.csv")));
  EXPECT_TRUE(fs::exists(out("o/profile.csv")));
  EXPECT_TRUE(slurp(out("o/survival.csv")).starts_with("# fpwalk "));
}

TEST_F(Cli, ExactZeroStepsIsSingleRow) {
  ASSERT_EQ(run("exact --dist ssrw --x 4 --n 0 --out " + out("o")), 0);
  const auto rows = parse_csv(slurp(out("o/survival.csv")));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"0", "4", "1"}));
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("exact --dist " + out("missing.json") + " --out " + out("o")), 2);
  write("bad.json", R"({"dist":"lazy","horizon":3})");
  EXPECT_EQ(run("exact --config " + out("bad.json") + " --out " + out("o")), 2);
  EXPECT_NE(slurp(out("stderr.txt")).find("horizon"), std::string::npos);
  write("drift.json", R"({"offsets":[-1,1],"probs":[0.4,0.6]})");
  EXPECT_EQ(run("exact --dist " + out("drift.json") + " --out " + out("o")), 2);
  EXPECT_EQ(run("exact --dist lazy --x 0.5 --out " + out("o")), 2);
  EXPECT_EQ(run("exact --dist lazy --n 100000000 --out " + out("o")), 2);  // memory budget
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("mc --dist lazy --seed -3"), 2);
}

TEST_F(Cli, ConfigFileAndFlagsMerge) {
  write("run.json", R"({"dist":"lazy","x":1,"n":5})");
  ASSERT_EQ(run("exact --config " + out("run.json") + " --n 2 --out " + out("o")), 0);
  EXPECT_NE(slurp(out("o/ladder.csv")).find("survival_prob,0.625\n"), std::string::npos);
}

TEST_F(Cli, ApproxColumnsAndValues) {
  ASSERT_EQ(run("approx --dist lazy --x 0 --n 64 --y 0 1 3 --out " + out("o")), 0);
  const auto rows = parse_csv(slurp(out("o/approx.csv")));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "y", "n", "reflection", "correction", "total", "rayleigh", "thm1_env",
                                               "ales_env", "improved_env"}));
  const double sigma = std::sqrt(0.5);
  const double ys[] = {0.0, 1.0, 3.0};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][3], "0");  // x = 0: no reflection mass
    const auto t = fpwalk::corrected_tail(0.0, ys[i - 1], 64.0, sigma, 0.25);
    EXPECT_EQ(rows[i][4], fpwalk::format_double(t.correction));
    EXPECT_EQ(rows[i][6], fpwalk::format_double(t.rayleigh));
  }
}

TEST_F(Cli, MonteCarloSeedAndExactColumn) {
  ASSERT_EQ(run("mc --dist lazy --x 1 --y 1 --n 2 --seed 17 --out " + out("a")), 0);
  const auto text = slurp(out("a/mc.csv"));
  EXPECT_NE(text.substr(0, text.find('\n')).find("seed 17"), std::string::npos);
  const auto rows = parse_csv(text);
  EXPECT_EQ(rows[0].back(), "exact");
  EXPECT_EQ(rows[1].back(), "0.625");
  ASSERT_EQ(run("mc --dist lazy --x 1 --y 1 --n 2 --seed 17 --workers 4 --out " + out("b")), 0);
  EXPECT_EQ(slurp(out("b/mc.csv")), text);
}

TEST_F(Cli, MonteCarloGaussianCompletes) {
  write("g.json", R"({"family":"gaussian","scale":1.0})");
  write("run.json", R"({"mc":{"batches":10,"paths_per_batch":1000,"horizon":200}})");
  ASSERT_EQ(run("mc --config " + out("run.json") + " --dist " + out("g.json") + " --x 0.5 --n 20 --out " + out("o")), 0);
  const auto rows = parse_csv(slurp(out("o/mc.csv")));
  EXPECT_EQ(rows[1].back(), "nan");
}

TEST_F(Cli, VerifyIsDeterministicAndPasses) {
  write("grid.json", R"({"n":[16,32,64],"be_n":[1,2,4,8,16,32,64],"x":[0,1,2],"u":[0,1,2,3]})");
  ASSERT_EQ(run("verify --grid " + out("grid.json") + " --out " + out("a")), 0);
  ASSERT_EQ(run("verify --grid " + out("grid.json") + " --out " + out("b")), 0);
  EXPECT_EQ(slurp(out("a/bounds.csv")), slurp(out("b/bounds.csv")));
  EXPECT_EQ(slurp(out("a/summary.json")), slurp(out("b/summary.json")));
  const auto summary = nlohmann::json::parse(slurp(out("a/summary.json")));
  EXPECT_TRUE(summary["all_explicit_hold"].get<bool>());
  ASSERT_EQ(summary["distributions"].size(), 3u);
  for (const auto& d : summary["distributions"]) {
    EXPECT_TRUE(d.contains("A1"));
    EXPECT_TRUE(d.contains("A2"));
    EXPECT_TRUE(d.contains("A3"));
    for (const auto& r : d["explicit"]) EXPECT_TRUE(r["holds"].get<bool>()) << r["bound_id"];
  }
  const auto header = parse_csv(slurp(out("a/bounds.csv"))).front();
  EXPECT_EQ(header, (std::vector<std::string>{"bound_id", "dist", "x", "y", "z", "n", "lhs", "rhs_scaled", "ratio"}));
}

TEST_F(Cli, VerifyRejectsUnknownGridKeys) {
  write("grid.json", R"({"n":[16],"m":[1]})");
  EXPECT_EQ(run("verify --grid " + out("grid.json") + " --out " + out("a")), 2);
}

TEST_F(Cli, ScanWritesPlateauAndRates) {
  write("d.json", R"({"offsets":[-2,1],"probs":[0.3333333333333333,0.6666666666666667]})");
  write("grid.json", R"({"n":[64,128,256,512]})");
  ASSERT_EQ(run("scan --dist " + out("d.json") + " --grid " + out("grid.json") + " --out " + out("o")), 0);
  const auto scan = parse_csv(slurp(out("o/scan.csv")));
  EXPECT_EQ(scan[0], (std::vector<std::string>{"x", "overshoot"}));
  EXPECT_NEAR(std::stod(scan.back()[1]), 1.0 / 3.0, 1e-12);
  const auto rates = parse_csv(slurp(out("o/rates.csv")));
  EXPECT_EQ(rates.size(), 5u);
}

}  // namespace
