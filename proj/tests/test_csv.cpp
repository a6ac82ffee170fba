#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "fpwalk/csv.hpp"
#include "fpwalk/exact.hpp"

using namespace fpwalk;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 0.625, 1e-300, 6.02214076e23, -2.5, 0.0}) EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  EXPECT_EQ(format_double(0.625), "0.625");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(ConfigHash, DependsOnContentNotInsertionOrder) {
  nlohmann::json a{{"x", 1}, {"n", 2}};
  nlohmann::json b;
  b["n"] = 2;
  b["x"] = 1;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b["x"] = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  // FNV-1a of "{}".
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : std::string("{}")) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  EXPECT_EQ(config_hash(nlohmann::json::object()), h);
}

TEST(CsvWriter, HeaderCommentAndColumns) {
  std::ostringstream out;
  CsvWriter w(out, nlohmann::json{{"a", 1}}, {"k", "value"}, "seed 3");
  w.row({std::int64_t{1}, 0.5});
  w.row({std::string("a,b"), 2.0});
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0].rfind("# fpwalk " + std::string(library_version()) + " config ", 0), 0u);
  EXPECT_NE(l[0].find(" seed 3"), std::string::npos);
  EXPECT_EQ(l[1], "k,value");
  EXPECT_EQ(l[2], "1,0.5");
  EXPECT_EQ(l[3], "\"a,b\",2");
  EXPECT_EQ(out.str().find('\r'), std::string::npos);
  EXPECT_THROW(w.row({1.0}), std::logic_error);
}

TEST(CsvExports, SurvivalTableAndProfile) {
  std::ostringstream a;
  write_survival_table(a, nlohmann::json::object(), survival_evolve(walks::ssrw(), 1, 2));
  const auto l = lines(a.str());
  EXPECT_EQ(l[1], "k,position,mass");
  EXPECT_EQ(l[2], "0,1,1");
  EXPECT_EQ(l.back(), "2,3,0.25");
  std::ostringstream b;
  write_profile(b, nlohmann::json::object(), stopping_profile(walks::lazy(), 1, 2));
  const auto p = lines(b.str());
  EXPECT_EQ(p[1], "k,pk,m1k,m2k");
  EXPECT_EQ(p[2], "1,0.25,0,0");
  EXPECT_EQ(p[3], "2,0.125,0,0");
}

TEST(CsvExports, MonteCarloRowsCarrySeed) {
  std::ostringstream out;
  McEstimate e{0.5, 0.01, 0.48, 0.52, 100};
  write_mc(out, nlohmann::json::object(), {{"tail", e, 0.0, 0.5}}, 42);
  const auto l = lines(out.str());
  EXPECT_NE(l[0].find("seed 42"), std::string::npos);
  EXPECT_EQ(l[1], "quantity,mean,stderr,lo,hi,n_paths,truncated_fraction,exact");
  EXPECT_EQ(l[2], "tail,0.5,0.01,0.47999999999999998,0.52000000000000002,100,0,0.5");
}

}  // namespace
