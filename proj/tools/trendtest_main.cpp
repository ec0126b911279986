// Command-line front end: trend test on CSV data, simulation harnesses and
// the exact-distribution diagnostic.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trendtest/serialize.hpp"
#include "trendtest/trendtest.hpp"
#include "trendtest/version.hpp"

namespace {

using nlohmann::json;

std::string iso8601_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

json make_manifest(const std::string& command, std::uint64_t seed,
                   const json& options, const std::string& input_path,
                   bool with_timestamp) {
  json m = {{"command", command},
            {"version", trendtest::kVersion},
            {"seed", seed},
            {"options", options}};
  if (!input_path.empty()) {
    m["input"] = {{"path", input_path},
                  {"fnv1a64", hex64(trendtest::fnv1a64_file(input_path))}};
  }
  if (with_timestamp) m["timestamp"] = iso8601_utc_now();
  return m;
}

void emit_report(const json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::ofstream out(out_path);
    if (!out) throw trendtest::DataError("cannot write '" + out_path + "'");
    out << report.dump(2) << '\n';
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw trendtest::DataError("cannot write '" + out_path + "'");
    out << text;
  }
}

void print_test_summary(const trendtest::TestResult& r) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed;
  s << "M statistic       " << r.m_observed << "\n"
    << "critical value    " << r.critical_value << " (alpha=" << r.alpha
    << ", N_b=" << r.n_boot << ")\n"
    << "p-value           " << std::setprecision(6) << r.p_value << "\n"
    << "decision          " << (r.reject() ? "reject H0" : "do not reject H0")
    << "\n"
    << "pair   o_x/tot_x      p_x     o_y/tot_y      p_y     pooled   shift\n";
  for (std::size_t i = 0; i < r.included.size(); ++i) {
    const std::size_t l = r.included[i];
    char line[160];
    std::snprintf(line, sizeof(line),
                  "%4zu   %7.1f/%-5lld %6.4f   %7.1f/%-5lld %6.4f   %6.4f  %+7.4f\n",
                  l + 1, r.table.o_x[i],
                  static_cast<long long>(r.table.tot_x[i]),
                  r.table.o_x[i] / static_cast<double>(r.table.tot_x[i]),
                  r.table.o_y[i],
                  static_cast<long long>(r.table.tot_y[i]),
                  r.table.o_y[i] / static_cast<double>(r.table.tot_y[i]),
                  r.pooled.p_pooled[i], r.shift.h[l + 1]);
    s << line;
  }
  bool any_dropped = false;
  std::ostringstream dropped;
  for (std::size_t l = 0; l + 1 < r.sizes_x.size(); ++l) {
    bool inc = false;
    for (std::size_t kept : r.included) inc = inc || kept == l;
    if (!inc) {
      dropped << (any_dropped ? ", " : "") << l + 1;
      any_dropped = true;
    }
  }
  if (any_dropped) {
    s << "dropped pairs     " << dropped.str()
      << " (a sub-sample on some side is empty)\n";
  }
  std::cerr << s.str();
}

void dump_bootstrap_sample(const std::string& path,
                           const std::vector<double>& sample) {
  std::ofstream out(path);
  if (!out) throw trendtest::DataError("cannot write '" + path + "'");
  out << "# t m_star\n" << std::setprecision(17);
  for (std::size_t t = 0; t < sample.size(); ++t) {
    out << t << ' ' << sample[t] << '\n';
  }
}

// Polls a shared counter and reports replicate throughput on stderr.
class ProgressPrinter {
 public:
  ProgressPrinter(std::atomic<std::size_t>& counter, std::size_t total,
                  bool enabled)
      : counter_(counter), total_(total), enabled_(enabled) {
    if (!enabled_) return;
    start_ = std::chrono::steady_clock::now();
    thread_ = std::thread([this] {
      while (!stop_.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(500));
        report();
      }
    });
  }

  ~ProgressPrinter() {
    if (!enabled_) return;
    stop_.store(true);
    thread_.join();
    report();
    std::cerr << '\n';
  }

 private:
  void report() {
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
    const std::size_t done = counter_.load();
    std::fprintf(stderr, "\rreplicates %zu/%zu (%.1f/s)", done, total_,
                 secs > 0 ? static_cast<double>(done) / secs : 0.0);
  }

  std::atomic<std::size_t>& counter_;
  std::size_t total_;
  bool enabled_;
  std::atomic<bool> stop_{false};
  std::chrono::steady_clock::time_point start_;
  std::thread thread_;
};

struct CommonFlags {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_path;
  bool no_timestamp = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "master RNG seed")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads for replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out", f.out_path, "write the report here instead of stdout");
  cmd->add_flag("--no-timestamp", f.no_timestamp,
                "omit the timestamp from the run manifest");
}

trendtest::TiePolicy tie_policy_from(const std::string& mode,
                                     const std::string& scope) {
  trendtest::TiePolicy p;
  p.mode = trendtest::tie_mode_from_string(mode);
  p.scope = trendtest::tie_scope_from_string(scope);
  return p;
}

int run_test(const std::string& data_path, double alpha, int n_boot,
             const CommonFlags& flags, const std::string& ties,
             const std::string& tie_scope, const std::string& dump_boot) {
  trendtest::BootstrapOptions opt;
  opt.alpha = alpha;
  opt.n_boot = n_boot;
  opt.seed = flags.seed;
  opt.threads = flags.threads;
  opt.ties = tie_policy_from(ties, tie_scope);
  opt.keep_sample = !dump_boot.empty();

  const auto records = trendtest::read_records_csv_file(data_path);
  const auto data = trendtest::validate(records);
  const auto result = trendtest::bootstrap_test(data, opt);

  if (!dump_boot.empty()) {
    dump_bootstrap_sample(dump_boot, result.bootstrap_sample);
  }

  // Thread count is deliberately not echoed: results do not depend on it.
  json options = {{"data", data_path},
                  {"alpha", alpha},
                  {"n_boot", n_boot},
                  {"tie_policy", opt.ties},
                  {"groups", {data.label_a, data.label_b}}};
  json result_json = result;
  if (!dump_boot.empty()) result_json.erase("bootstrap_sample");
  const json report = {
      {"manifest", make_manifest("test", flags.seed, options, data_path,
                                 !flags.no_timestamp)},
      {"result", result_json}};

  print_test_summary(result);
  emit_report(report, flags.out_path);
  return 0;
}

trendtest::SimConfig sim_config_from_flags(
    CLI::App* cmd, const std::string& config_path,
    std::vector<std::size_t>& sizes_x, std::vector<std::size_t>& sizes_y,
    std::vector<double>& true_p, std::vector<double>& true_p_x,
    std::vector<double>& true_p_y, int n_rep, int n_boot, double alpha,
    const std::string& family, const CommonFlags& flags) {
  trendtest::SimConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw trendtest::DataError("cannot open '" + config_path + "'");
    json j;
    in >> j;
    cfg = j.get<trendtest::SimConfig>();
  }
  const auto given = [cmd](const std::string& name) {
    const auto* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--sizes-x")) cfg.sizes_x = sizes_x;
  if (given("--sizes-y")) cfg.sizes_y = sizes_y;
  if (cfg.sizes_y.empty()) cfg.sizes_y = cfg.sizes_x;
  if (given("--true-p")) cfg.true_p = true_p;
  if (given("--true-p-x")) cfg.true_p_x = true_p_x;
  if (given("--true-p-y")) cfg.true_p_y = true_p_y;
  if (given("--nrep")) cfg.n_rep = n_rep;
  if (given("--nboot")) cfg.n_boot = n_boot;
  if (given("--alpha")) cfg.alpha = alpha;
  if (given("--seed") || config_path.empty()) cfg.seed = flags.seed;
  if (given("--threads") || config_path.empty()) cfg.threads = flags.threads;
  if (given("--family")) cfg.family = trendtest::family_from_string(family);
  return cfg;
}

int run_sim(const std::string& kind, trendtest::SimConfig cfg,
            const CommonFlags& flags, bool progress, bool keep_pvalues,
            const std::string& config_path) {
  cfg.keep_pvalues = keep_pvalues;
  std::atomic<std::size_t> done{0};
  cfg.progress = &done;
  trendtest::SimReport report;
  {
    ProgressPrinter printer(done, static_cast<std::size_t>(cfg.n_rep),
                            progress);
    report = (kind == "type1") ? trendtest::type1_error_sim(cfg)
                               : trendtest::power_sim(cfg);
  }

  json options = json(cfg);
  if (!config_path.empty()) options["config_file"] = config_path;
  json out = {{"manifest", make_manifest(kind, cfg.seed, options, config_path,
                                         !flags.no_timestamp)},
              {"report", report}};
  // --no-timestamp promises byte-reproducible output, so it also blanks the
  // wall-clock measurement.
  if (flags.no_timestamp) out["report"]["wall_time_s"] = 0.0;
  char summary[160];
  std::snprintf(summary, sizeof(summary),
                "%s: err=%.4f (%d/%d rejected) alpha=%g wall=%.1fs\n",
                kind.c_str(), report.err,
                static_cast<int>(report.err * cfg.n_rep + 0.5), cfg.n_rep,
                cfg.alpha, report.wall_time_s);
  std::cerr << summary;
  emit_report(out, flags.out_path);
  return 0;
}

int run_power_table(const std::string& table_path, double alpha, int n_boot,
                    const CommonFlags& flags) {
  const auto spec = trendtest::read_table_spec_file(table_path);
  const auto result = trendtest::run_fixed_table_test(
      spec.table, spec.sizes_x, spec.sizes_y, n_boot, alpha, flags.seed,
      flags.threads);
  json options = {{"table", table_path},
                  {"alpha", alpha},
                  {"n_boot", n_boot}};
  const json report = {
      {"manifest", make_manifest("power", flags.seed, options, table_path,
                                 !flags.no_timestamp)},
      {"result", json(result)}};
  print_test_summary(result);
  emit_report(report, flags.out_path);
  return 0;
}

int run_exact(int n1, int n2, double p, const std::string& compare, double h,
              bool h_given, int n_sims, const CommonFlags& flags) {
  const auto pmf = trendtest::exact_pmf(n1, n2, p);

  trendtest::ExactPmf oracle;
  if (compare == "permutation") {
    oracle = trendtest::permutation_pmf(n1, n2);
  } else if (compare == "mc") {
    const double shift =
        h_given ? h : std::sqrt(2.0) * trendtest::normal_quantile(p);
    oracle = trendtest::mc_count_pmf(n1, n2, shift, n_sims, flags.seed);
  }

  std::ostringstream out;
  out << std::setprecision(17);
  out << "# trendtest exact v" << trendtest::kVersion << " n1=" << n1
      << " n2=" << n2 << " p=" << p;
  if (compare == "mc") out << " nsims=" << n_sims << " seed=" << flags.seed;
  out << "\nk,probability";
  if (!compare.empty()) out << ',' << compare;
  out << '\n';
  for (std::size_t k = 0; k < pmf.mass.size(); ++k) {
    out << k << ',' << pmf.mass[k];
    if (!compare.empty()) out << ',' << oracle.mass[k];
    out << '\n';
  }
  if (!compare.empty()) {
    const double tv = trendtest::total_variation(pmf, oracle);
    out << "# tv_distance," << tv << '\n';
    std::cerr << "total variation distance vs " << compare << ": " << tv
              << '\n';
  }
  emit_text(out.str(), flags.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample sequential trend test (bootstrap, Mann-Whitney counts)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("trendtest ") + trendtest::kVersion);

  // test
  auto* cmd_test = app.add_subcommand("test", "run the trend test on a CSV dataset");
  std::string data_path, ties = "expected_half", tie_scope = "all_exact_ties";
  std::string dump_boot;
  double alpha = 0.05;
  int n_boot = 1000;
  CommonFlags test_flags;
  cmd_test->add_option("--data", data_path, "CSV with group,level,value columns")
      ->required();
  cmd_test->add_option("--alpha", alpha, "test level")->capture_default_str();
  cmd_test->add_option("--nboot", n_boot, "bootstrap replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_test->add_option("--ties", ties, "tie handling: expected_half|random_coin")
      ->check(CLI::IsMember({"expected_half", "random_coin"}))
      ->capture_default_str();
  cmd_test
      ->add_option("--tie-scope", tie_scope,
                   "ties covered: all_exact_ties|zero_zero_pairs")
      ->check(CLI::IsMember({"all_exact_ties", "zero_zero_pairs"}))
      ->capture_default_str();
  cmd_test->add_option("--dump-boot", dump_boot,
                       "write the M* sample to this file (gnuplot-friendly)");
  add_common(cmd_test, test_flags);

  // type1 / power
  std::string config_path, family = "normal", table_path;
  std::vector<std::size_t> sizes_x, sizes_y;
  std::vector<double> true_p, true_p_x, true_p_y;
  int n_rep = 1000, sim_n_boot = 1000;
  double sim_alpha = 0.05;
  bool progress = false, keep_pvalues = false;
  CommonFlags sim_flags;

  const auto add_sim_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--sizes-x", sizes_x, "sub-sample sizes, group A")
        ->delimiter(',');
    cmd->add_option("--sizes-y", sizes_y,
                    "sub-sample sizes, group B (defaults to --sizes-x)")
        ->delimiter(',');
    cmd->add_option("--nrep", n_rep, "outer replications")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--nboot", sim_n_boot, "inner bootstrap replicates")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--alpha", sim_alpha, "test level")->capture_default_str();
    cmd->add_option("--family", family, "data-generating family: normal|logistic")
        ->check(CLI::IsMember({"normal", "logistic"}))
        ->capture_default_str();
    cmd->add_flag("--progress", progress, "print replicate throughput");
    cmd->add_flag("--keep-pvalues", keep_pvalues,
                  "include per-replication p-values in the report");
    add_common(cmd, sim_flags);
  };

  auto* cmd_type1 =
      app.add_subcommand("type1", "type-I-error study under a true null");
  cmd_type1->add_option("--true-p", true_p, "shared adjacent-pair probabilities")
      ->delimiter(',');
  add_sim_options(cmd_type1);

  auto* cmd_power = app.add_subcommand(
      "power", "power study, or a single fixed-table test via --table");
  cmd_power->add_option("--true-p-x", true_p_x, "group A pair probabilities")
      ->delimiter(',');
  cmd_power->add_option("--true-p-y", true_p_y, "group B pair probabilities")
      ->delimiter(',');
  cmd_power->add_option("--table", table_path,
                        "run one bootstrap test from a table spec file");
  add_sim_options(cmd_power);

  // exact
  auto* cmd_exact = app.add_subcommand(
      "exact", "pmf of a pairwise count from the size-reduction recurrence");
  int n1 = 1, n2 = 1, n_sims = 100000;
  double p = 0.5, h_shift = 0.0;
  std::string compare;
  CommonFlags exact_flags;
  cmd_exact->add_option("--n1", n1, "lower sub-sample size")->required();
  cmd_exact->add_option("--n2", n2, "upper sub-sample size")->required();
  cmd_exact->add_option("--p", p, "success probability")->required();
  cmd_exact
      ->add_option("--compare", compare,
                   "append an oracle column: permutation|mc")
      ->check(CLI::IsMember({"permutation", "mc"}));
  auto* h_opt = cmd_exact->add_option(
      "--shift", h_shift,
      "normal shift for --compare mc (default sqrt2*quantile(p))");
  cmd_exact->add_option("--nsims", n_sims, "draws for --compare mc")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(cmd_exact, exact_flags);

  try {
    app.parse(argc, argv);

    if (cmd_test->parsed()) {
      return run_test(data_path, alpha, n_boot, test_flags, ties, tie_scope,
                      dump_boot);
    }
    if (cmd_type1->parsed()) {
      const auto cfg = sim_config_from_flags(
          cmd_type1, config_path, sizes_x, sizes_y, true_p, true_p_x,
          true_p_y, n_rep, sim_n_boot, sim_alpha, family, sim_flags);
      return run_sim("type1", cfg, sim_flags, progress, keep_pvalues,
                     config_path);
    }
    if (cmd_power->parsed()) {
      if (!table_path.empty()) {
        return run_power_table(table_path, sim_alpha, sim_n_boot, sim_flags);
      }
      const auto cfg = sim_config_from_flags(
          cmd_power, config_path, sizes_x, sizes_y, true_p, true_p_x,
          true_p_y, n_rep, sim_n_boot, sim_alpha, family, sim_flags);
      return run_sim("power", cfg, sim_flags, progress, keep_pvalues,
                     config_path);
    }
    if (cmd_exact->parsed()) {
      return run_exact(n1, n2, p, compare, h_shift, h_opt->count() > 0,
                       n_sims, exact_flags);
    }
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const trendtest::NoComparablePairsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const trendtest::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
