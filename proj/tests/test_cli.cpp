#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include <json.hpp>

#include "support.hpp"

using nlohmann::json;
using ttest::data_file;
using ttest::run_cli;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& body) {
  const auto dir = ttest::fresh_temp_dir("csv");
  const auto path = (dir / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("test subcommand reproduces the real-data statistic", "[cli]") {
  const auto r = run_cli("test --data \"" + data_file("pac_pacga.csv") +
                             "\" --alpha 0.05 --nboot 2000 --seed 7 "
                             "--no-timestamp",
                         "golden");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK_THAT(report["result"]["m_observed"].get<double>(),
             Catch::Matchers::WithinAbs(31.598639753360036, 1e-9));
  CHECK(report["result"]["included_pairs"] == json({1, 2, 3, 4}));
  CHECK(report["result"]["dropped_pairs"] == json({5, 6}));
  CHECK(report["manifest"]["input"].contains("fnv1a64"));
  CHECK_FALSE(report["manifest"].contains("timestamp"));
  CHECK(r.err.find("M statistic") != std::string::npos);
  CHECK(r.err.find("dropped pairs") != std::string::npos);
}

TEST_CASE("identical groups give a null result", "[cli]") {
  std::string body = "group,level,value\n";
  for (const char* g : {"a", "b"}) {
    for (int lev = 1; lev <= 3; ++lev) {
      for (int j = 0; j < 4; ++j) {
        body += std::string(g) + "," + std::to_string(lev) + "," +
                std::to_string(lev * 10 + j) + ".5\n";
      }
    }
  }
  const auto path = write_temp_csv("dup.csv", body);
  const auto r = run_cli("test --data \"" + path +
                             "\" --nboot 300 --seed 3 --no-timestamp",
                         "dup");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["result"]["m_observed"].get<double>() == 0.0);
  CHECK(report["result"]["p_value"].get<double>() == 1.0);
  CHECK(report["result"]["reject"] == false);
}

TEST_CASE("malformed input exits with code 2", "[cli]") {
  const auto path =
      write_temp_csv("bad.csv", "group,value\na,1\nb,2\n");  // no level column
  const auto r = run_cli("test --data \"" + path + "\"", "bad");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("level") != std::string::npos);

  const auto r2 = run_cli("test --data /nonexistent.csv", "nofile");
  CHECK(r2.exit_code == 2);

  const auto r3 = run_cli("test --data x --definitely-not-a-flag", "badflag");
  CHECK(r3.exit_code == 2);
}

TEST_CASE("no comparable pairs exits with code 3", "[cli]") {
  // Group a skips level 2 entirely, so both pairs touch an empty sub-sample.
  const auto path = write_temp_csv("gap.csv",
                                   "group,level,value\n"
                                   "a,1,1\na,1,2\na,3,3\na,3,4\n"
                                   "b,1,1\nb,2,2\nb,3,3\n");
  const auto r = run_cli("test --data \"" + path + "\" --nboot 100", "gap");
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("no comparable pairs") != std::string::npos);
}

TEST_CASE("reports are byte-identical across thread counts", "[cli]") {
  const std::string base = "test --data \"" + data_file("pac_pacga.csv") +
                           "\" --nboot 1000 --seed 11 --no-timestamp";
  const auto t1 = run_cli(base + " --threads 1", "t1");
  const auto t4 = run_cli(base + " --threads 4", "t4");
  const auto t8 = run_cli(base + " --threads 8", "t8");
  REQUIRE(t1.exit_code == 0);
  CHECK(t1.out == t4.out);
  CHECK(t1.out == t8.out);

  // Same invocation twice: identical bytes; different seed: different report.
  const auto again = run_cli(base + " --threads 1", "t1b");
  CHECK(again.out == t1.out);
  const auto other = run_cli("test --data \"" + data_file("pac_pacga.csv") +
                                 "\" --nboot 1000 --seed 12 --no-timestamp",
                             "t1c");
  CHECK(other.out != t1.out);
}

TEST_CASE("bootstrap sample dumps are written on request", "[cli]") {
  const auto dir = ttest::fresh_temp_dir("dump");
  const auto dump = (dir / "mstar.dat").string();
  const auto r = run_cli("test --data \"" + data_file("pac_pacga.csv") +
                             "\" --nboot 50 --seed 1 --dump-boot \"" + dump +
                             "\" --no-timestamp",
                         "dump");
  REQUIRE(r.exit_code == 0);
  const auto content = ttest::slurp(dump);
  CHECK(content.find("# t m_star") == 0);
  // one header plus 50 sample lines
  CHECK(std::count(content.begin(), content.end(), '\n') == 51);
}

TEST_CASE("exact subcommand emits the pmf as CSV", "[cli]") {
  const auto r = run_cli("exact --n1 1 --n2 1 --p 0.3", "exact11");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("k,probability\n") != std::string::npos);
  CHECK(r.out.find("0,0.69999") != std::string::npos);
  CHECK(r.out.find("1,0.29999") != std::string::npos);
}

TEST_CASE("exact subcommand compares against the permutation oracle",
          "[cli]") {
  const auto r =
      run_cli("exact --n1 2 --n2 2 --p 0.5 --compare permutation", "exactcmp");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("k,probability,permutation\n") != std::string::npos);
  CHECK(r.out.find("# tv_distance,0.1666") != std::string::npos);
  CHECK(r.err.find("total variation") != std::string::npos);
}

TEST_CASE("exact subcommand checks the monte carlo sampler", "[cli]") {
  const auto r = run_cli(
      "exact --n1 2 --n2 2 --p 0.5 --compare mc --nsims 20000 --seed 5",
      "exactmc");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("k,probability,mc\n") != std::string::npos);
}

TEST_CASE("power --table runs a fixed-table bootstrap", "[cli]") {
  const auto r = run_cli("power --table \"" + data_file("table4_row1.csv") +
                             "\" --nboot 2000 --seed 21 --no-timestamp",
                         "powertable");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  const double p = report["result"]["p_value"].get<double>();
  CHECK(p > 0.55);
  CHECK(p < 0.95);
  CHECK(report["manifest"]["input"].contains("fnv1a64"));
}

TEST_CASE("type1 subcommand runs from flags", "[cli]") {
  const auto r = run_cli(
      "type1 --sizes-x 5,5 --true-p 0.4 --nrep 6 --nboot 60 --seed 2 "
      "--threads 2 --keep-pvalues --no-timestamp",
      "type1");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  const double err = report["report"]["err"].get<double>();
  CHECK(err >= 0.0);
  CHECK(err <= 1.0);
  CHECK(report["report"]["rep_pvalues"].size() == 6);
  CHECK(report["report"]["config"]["sizes_y"] == json({5, 5}));
  CHECK(r.err.find("type1: err=") != std::string::npos);
}

TEST_CASE("power subcommand accepts a config file", "[cli]") {
  const auto dir = ttest::fresh_temp_dir("cfg");
  const auto cfg_path = (dir / "power.json").string();
  {
    std::ofstream out(cfg_path);
    out << R"({"sizes_x":[6,6],"sizes_y":[6,6],"true_p_x":[0.9],)"
        << R"("true_p_y":[0.1],"n_rep":8,"n_boot":80,"alpha":0.05,)"
        << R"("seed":9,"threads":2,"family":"normal"})";
  }
  const auto r = run_cli("power --config \"" + cfg_path + "\" --no-timestamp",
                         "powercfg");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["report"]["config"]["n_rep"] == 8);
  CHECK(report["report"]["err"].get<double>() >= 0.0);
}

TEST_CASE("help and version exit cleanly", "[cli]") {
  CHECK(run_cli("--help", "help").exit_code == 0);
  const auto v = run_cli("--version", "version");
  CHECK(v.exit_code == 0);
  CHECK(v.out.find("trendtest") != std::string::npos);
}
