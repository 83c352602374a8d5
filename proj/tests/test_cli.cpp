#include <gtest/gtest.h>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace histories;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string fixture(const std::string& name) { return std::string(HISTORIES_FIXTURES) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("histories_cli_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(Cli, ProbLarmorQuarterPeriod) {
  const auto r = run({"prob", "builtin:larmor", "+1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.500000000000 strategy=projected-propagator\n");
  EXPECT_EQ(run({"prob", fixture("larmor.json"), "-1"}).out.substr(0, 14), "0.500000000000");
}

TEST(Cli, ProbOutcomeSyntaxes) {
  for (const std::string s : {"(+1,+1)", "+1,+1", "1 1"}) {
    const auto r = run({"prob", "builtin:epr?theta=0.3&theta_prime=0.3", s});
    EXPECT_EQ(r.code, 0) << s << ": " << r.err;
    EXPECT_EQ(r.out.substr(0, 14), "0.000000000000") << s;
  }
  const auto r = run({"prob", "builtin:epr?theta=0&theta_prime=3.141592653589793", "(+1,+1)"});
  EXPECT_EQ(r.out.substr(0, 14), "0.500000000000");
}

TEST(Cli, ProbRejectsUnknownEigenvalueAndWrongLength) {
  EXPECT_EQ(run({"prob", "builtin:larmor", "+2"}).code, 3);
  EXPECT_EQ(run({"prob", "builtin:epr", "(+1)"}).code, 3);
}

TEST(Cli, ProbWithOracle) {
  const auto r = run({"--oracle", "prob", "builtin:eraser", "(1,2)"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_NE(l[1].find("strategy=trace-formula"), std::string::npos);
  EXPECT_EQ(l[2].rfind("oracle trace-formula max_abs_difference=", 0), 0u);
}

TEST(Cli, StrategiesGiveTheSameNumbers) {
  const auto a = run({"--strategy", "path-sum", "prob", fixture("epr_theta_0.3_1.1.json"), "(-1,+1)"});
  const auto b = run({"--strategy", "trace-formula", "prob", fixture("epr_theta_0.3_1.1.json"), "(-1,+1)"});
  const auto c = run({"prob", fixture("epr_theta_0.3_1.1.json"), "(-1,+1)"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out.substr(0, 14), b.out.substr(0, 14));
  EXPECT_EQ(a.out.substr(0, 14), c.out.substr(0, 14));
  EXPECT_NE(a.out.find("strategy=path-sum"), std::string::npos);
  EXPECT_EQ(run({"--strategy", "fastest", "prob", "builtin:larmor", "+1"}).code, 3);
}

TEST(Cli, DistributionCsv) {
  const auto r = run({"distribution", "builtin:eraser"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 6u);
  EXPECT_EQ(l[0], "C,D,probability");
  EXPECT_EQ(l[1], "1,1,0.500000000000");
  EXPECT_EQ(l[4], "2,2,0.500000000000");
  EXPECT_EQ(l[5], "# sum=1.000000000000 strategy=projected-propagator");
}

TEST(Cli, DistributionEprQuarters) {
  const auto r = run({"--oracle", "distribution", "builtin:epr"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 7u);
  EXPECT_EQ(l[0], "alice,bob,probability");
  for (int i = 1; i <= 4; ++i) EXPECT_EQ(l[i].substr(l[i].rfind(',') + 1), "0.250000000000");
  EXPECT_EQ(l[1].substr(0, 6), "-1,-1,");
  EXPECT_EQ(l[6].rfind("# oracle trace-formula", 0), 0u);
}

TEST(Cli, PathsCsv) {
  const auto all = run({"paths", "builtin:epr"});
  EXPECT_EQ(all.code, 0) << all.err;
  EXPECT_EQ(lines(all.out).size(), 17u);
  EXPECT_EQ(lines(all.out)[0], "n_alice,n_bob,re,im,abs2");
  const auto nz = run({"--oracle", "paths", "--nonzero", "builtin:epr"});
  EXPECT_EQ(nz.code, 0) << nz.err;
  const auto l = lines(nz.out);
  ASSERT_EQ(l.size(), 6u);
  double total = 0.0;
  for (int i = 1; i <= 4; ++i) total += std::stod(l[i].substr(l[i].rfind(',') + 1));
  EXPECT_NEAR(total, 1.0, 1e-11);
  EXPECT_EQ(l[5].rfind("# oracle trace-formula", 0), 0u);
}

TEST(Cli, WeakValues) {
  const auto a = run({"weak-value", fixture("anomalous_weak_value.json"), "Q"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, "-2.414213562373 +0.000000000000i\n");
  const auto b = run({"--oracle", "weak-value", fixture("identity_weak_value.json"), "I"});
  EXPECT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(lines(b.out)[0], "1.000000000000 +0.000000000000i");
  const auto c = run({"weak-value", "--pointer", "1e-3", "129", fixture("anomalous_weak_value.json"), "Q"});
  EXPECT_EQ(c.code, 0) << c.err;
  const auto l = lines(c.out);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[1].rfind("pointer g=0.001 dim=129 estimate=-2.41", 0), 0u);
  EXPECT_EQ(run({"weak-value", fixture("anomalous_weak_value.json"), "nope"}).code, 3);
  EXPECT_EQ(run({"weak-value", "--pointer", "1e-3", "128", fixture("anomalous_weak_value.json"), "Q"}).code, 3);
}

TEST(Cli, OrthogonalPostSelectionExitsFive) {
  const std::string doc = R"({"version": 1, "dimension": 2,
    "measurements": [{"time": 1, "label": "Q", "matrix": [[1, 0], [0, -1]]}],
    "preparation": {"kind": "pure", "vector": [1, 0]},
    "postselection": {"time": 2, "vector": [0, 1]}})";
  const auto r = run({"weak-value", write_temp("orthogonal.json", doc), "Q"});
  EXPECT_EQ(r.code, 5) << r.err;
}

TEST(Cli, SampleReports) {
  const auto a = run({"sample", "builtin:larmor", "--n", "1000", "--seed", "4"});
  const auto b = run({"sample", "builtin:larmor", "--n", "1000", "--seed", "4"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["n"], 1000);
  EXPECT_EQ(j["method"], "inverse-cdf");
  const auto c = run({"sample", "builtin:epr", "--n", "500", "--method", "conditional"});
  EXPECT_EQ(nlohmann::json::parse(c.out)["method"], "sequential-conditional");
  EXPECT_EQ(run({"sample", "builtin:larmor", "--n", "0"}).code, 3);
  EXPECT_EQ(run({"sample", "builtin:larmor", "--n", "10", "--method", "magic"}).code, 3);
}

TEST(Cli, Sweep) {
  const auto r = run({"sweep", "epr", "theta_prime", "0", "3.141592653589793", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 6u);
  EXPECT_EQ(l[0], R"csv(theta_prime,"P(-1,-1)","P(-1,+1)","P(+1,-1)","P(+1,+1)")csv");
  EXPECT_EQ(l[1], "0,0.000000000000,0.500000000000,0.500000000000,0.000000000000");
  EXPECT_EQ(l[5].substr(l[5].find(',')), ",0.500000000000,0.000000000000,0.000000000000,0.500000000000");
  const auto one = run({"sweep", "builtin:larmor?omega=2", "t", "0", "1", "0"});
  EXPECT_EQ(lines(one.out).size(), 2u);
  EXPECT_EQ(lines(one.out)[1], "0,0.000000000000,1.000000000000");
  EXPECT_EQ(run({"sweep", "epr", "phi", "0", "1", "3"}).code, 3);
  EXPECT_EQ(run({"sweep", "nothing", "t", "0", "1", "3"}).code, 3);
  EXPECT_EQ(run({"--oracle", "sweep", "eraser", "d_theta", "0", "1", "2"}).code, 0);
}

TEST(Cli, Validate) {
  const auto ok = run({"validate", fixture("anomalous_weak_value.json")});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "ok\n");
  const std::string bad = R"({"version": 1, "dimension": 2,
    "measurements": [{"time": 1, "label": "Q", "matrix": [[1, 1], [0, -1]]}],
    "preparation": {"kind": "pure", "vector": [1, 1]}})";
  const auto r = run({"validate", write_temp("bad.json", bad)});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("measurements"), std::string::npos);
  EXPECT_NE(r.err.find("preparation"), std::string::npos);
  EXPECT_EQ(run({"prob", write_temp("bad.json", bad), "1"}).code, 2);
  EXPECT_EQ(run({"validate", write_temp("garbage.json", "{\"version\": ")}).code, 2);
  EXPECT_EQ(run({"validate", "/nonexistent/scenario.json"}).code, 2);
}

TEST(Cli, BudgetExitsFour) {
  const auto r = run({"--budget", "10", "--strategy", "path-sum", "distribution", "builtin:epr"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("projected-propagator"), std::string::npos);
  EXPECT_EQ(run({"--budget", "3", "distribution", "builtin:epr"}).code, 4);
  EXPECT_EQ(run({"--budget", "100", "--strategy", "path-sum", "distribution", "builtin:epr"}).code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 3);
  EXPECT_EQ(run({"frobnicate"}).code, 3);
  EXPECT_EQ(run({"prob", "builtin:larmor"}).code, 3);
  EXPECT_EQ(run({"prob", "builtin:larmor?omega=-1", "+1"}).code, 3);
  EXPECT_EQ(run({"prob", "builtin:larmor?speed=1", "+1"}).code, 3);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, OutputIgnoresTheProcessLocale) {
  const char* candidates[] = {"de_DE.UTF-8", "de_DE.utf8", "fr_FR.UTF-8", "fr_FR.utf8"};
  const char* found = nullptr;
  for (const char* c : candidates)
    if (std::setlocale(LC_ALL, c)) {
      found = c;
      break;
    }
  if (!found) GTEST_SKIP() << "no comma-decimal locale installed";
  std::locale::global(std::locale(found));
  const auto r = run({"prob", "builtin:larmor?t=0.5", "+1"});
  std::locale::global(std::locale::classic());
  std::setlocale(LC_ALL, "C");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 14), fmt::format("{:.12f}", std::pow(std::cos(0.5), 2)));
}

namespace {
struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};
}  // namespace

TEST(Cli, OutputIgnoresTheGlobalStreamLocale) {
  std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  const auto r = run({"sweep", "builtin:larmor?omega=1.5", "t", "0.25", "1000.5", "1"});
  std::locale::global(std::locale::classic());
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[1].substr(0, 5), "0.25,");
  EXPECT_EQ(l[2].substr(0, 7), "1000.5,");
}
