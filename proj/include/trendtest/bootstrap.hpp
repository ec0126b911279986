#pragma once

// Bootstrap null sampler and hypothesis test: pooled pair estimates, the
// normal-shift construction, replicate generation, critical value and
// p-value.
//
// Replicate t draws from the stream seeded with substream_seed(seed, t), so
// the full M* sample is reproducible and independent of how replicates are
// scheduled over threads. The observed table (which consumes randomness only
// under the random_coin tie policy) uses the reserved substream index
// 2^64 - 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "trendtest/dataset.hpp"
#include "trendtest/normal.hpp"
#include "trendtest/parallel.hpp"
#include "trendtest/rng.hpp"
#include "trendtest/tables.hpp"

namespace trendtest {

struct PooledEstimates {
  std::vector<double> p_pooled;  // per included pair, clamped to (0,1)
  std::vector<bool> clamped;
};

// Weighted average of the two groups' pair proportions, clamped away from
// {0,1} by eps = 1/(2*(tot_x+tot_y)) so the shift construction stays finite.
inline PooledEstimates pool_estimates(const FrequencyTable& t) {
  check_table(t);
  PooledEstimates out;
  out.p_pooled.reserve(t.pairs());
  out.clamped.reserve(t.pairs());
  for (std::size_t l = 0; l < t.pairs(); ++l) {
    const double total = static_cast<double>(t.tot_x[l] + t.tot_y[l]);
    const double raw = (t.o_x[l] + t.o_y[l]) / total;
    const double eps = 1.0 / (2.0 * total);
    const double clamped = std::min(std::max(raw, eps), 1.0 - eps);
    out.p_pooled.push_back(clamped);
    out.clamped.push_back(clamped != raw);
  }
  return out;
}

// Per-level means of the null sampler. h[0] = 0 and the mean at the upper
// level of pair l is sqrt(2) * Phi^-1(p_pooled[l]); each entry depends only
// on its own pair estimate, not cumulatively. Levels not covered by any
// included pair keep mean 0 (their draws never enter the table).
struct ShiftVector {
  std::vector<double> h;  // one mean per level

  std::size_t levels() const { return h.size(); }
};

inline ShiftVector shifts(const PooledEstimates& pooled,
                          const PairSelection& sel, std::size_t num_levels) {
  if (sel.included.size() != pooled.p_pooled.size()) {
    throw std::invalid_argument("shifts: selection/estimate size mismatch");
  }
  ShiftVector s;
  s.h.assign(num_levels, 0.0);
  for (std::size_t i = 0; i < sel.included.size(); ++i) {
    const std::size_t upper = sel.included[i] + 1;
    if (upper >= num_levels) {
      throw std::invalid_argument("shifts: pair index out of range");
    }
    s.h[upper] = std::sqrt(2.0) * normal_quantile(pooled.p_pooled[i]);
  }
  return s;
}

// Contiguous case: K estimates drive levels 2..K+1.
inline ShiftVector shifts(const PooledEstimates& pooled) {
  PairSelection all;
  for (std::size_t l = 0; l < pooled.p_pooled.size(); ++l) {
    all.included.push_back(l);
  }
  return shifts(pooled, all, pooled.p_pooled.size() + 1);
}

// Draws a synthetic dataset: sub-sample i of both groups is i.i.d.
// normal(h[i], 1) with the given sizes (zero sizes stay empty). Group A is
// drawn first, level by level, then group B.
inline TrendDataset generate_null_replicate(const ShiftVector& shift,
                                            std::span<const std::size_t> sizes_x,
                                            std::span<const std::size_t> sizes_y,
                                            rng::Stream& rng) {
  if (sizes_x.size() != shift.levels() || sizes_y.size() != shift.levels()) {
    throw std::invalid_argument("generate_null_replicate: size/shift mismatch");
  }
  TrendDataset d;
  d.group_a.resize(shift.levels());
  d.group_b.resize(shift.levels());
  for (std::size_t i = 0; i < shift.levels(); ++i) {
    d.group_a[i].reserve(sizes_x[i]);
    for (std::size_t j = 0; j < sizes_x[i]; ++j) {
      d.group_a[i].push_back(rng.normal(shift.h[i]));
    }
  }
  for (std::size_t i = 0; i < shift.levels(); ++i) {
    d.group_b[i].reserve(sizes_y[i]);
    for (std::size_t j = 0; j < sizes_y[i]; ++j) {
      d.group_b[i].push_back(rng.normal(shift.h[i]));
    }
  }
  return d;
}

struct BootstrapOptions {
  double alpha = 0.05;
  int n_boot = 1000;
  std::uint64_t seed = 0;
  TiePolicy ties{};
  int threads = 1;
  bool keep_sample = false;  // retain the M* values in the result
};

struct TestResult {
  double m_observed = 0.0;
  double critical_value = 0.0;
  double p_value = 0.0;
  double alpha = 0.0;
  int n_boot = 0;
  std::uint64_t seed = 0;
  TiePolicy ties{};
  FrequencyTable table;
  PooledEstimates pooled;
  ShiftVector shift;
  std::vector<std::size_t> included;  // 0-based pair indices
  std::vector<std::size_t> sizes_x, sizes_y;
  std::vector<std::string> level_labels;  // carried over when the data has them
  std::vector<double> bootstrap_sample;  // empty unless keep_sample

  bool reject() const { return m_observed > critical_value; }
};

namespace detail {

constexpr std::uint64_t kObservedStreamIndex = ~std::uint64_t{0};

// Empirical (1-q)th percentile as the ceil((1-q)*n)-th order statistic
// (1-based). The small epsilon keeps exact-integer ranks from being pushed
// up by floating-point excess. Rank 0 (q = 1) maps to -infinity.
inline double upper_order_statistic(std::vector<double> sample, double q) {
  const double rank_real = (1.0 - q) * static_cast<double>(sample.size());
  const auto rank = static_cast<std::ptrdiff_t>(std::ceil(rank_real - 1e-9));
  if (rank <= 0) return -std::numeric_limits<double>::infinity();
  std::sort(sample.begin(), sample.end());
  return sample[static_cast<std::size_t>(rank) - 1];
}

inline void check_bootstrap_options(const BootstrapOptions& opt) {
  if (opt.n_boot < 1) {
    throw std::invalid_argument("n_boot must be positive");
  }
  if (!(opt.alpha > 0.0 && opt.alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
}

// Steps 2-9 of the testing procedure, given the observed table.
inline TestResult bootstrap_core(const FrequencyTable& table,
                                 const PairSelection& sel,
                                 std::span<const std::size_t> sizes_x,
                                 std::span<const std::size_t> sizes_y,
                                 const BootstrapOptions& opt) {
  check_bootstrap_options(opt);
  check_table(table);
  if (table.pairs() != sel.included.size()) {
    throw std::invalid_argument("table/selection size mismatch");
  }

  TestResult r;
  r.alpha = opt.alpha;
  r.n_boot = opt.n_boot;
  r.seed = opt.seed;
  r.ties = opt.ties;
  r.table = table;
  r.included = sel.included;
  r.sizes_x.assign(sizes_x.begin(), sizes_x.end());
  r.sizes_y.assign(sizes_y.begin(), sizes_y.end());
  r.m_observed = m_statistic(table);
  r.pooled = pool_estimates(table);
  r.shift = shifts(r.pooled, sel, sizes_x.size());

  std::vector<double> m_star(static_cast<std::size_t>(opt.n_boot));
  parallel_for_index(m_star.size(), opt.threads, [&](std::size_t t) {
    rng::Stream stream(rng::substream_seed(opt.seed, t));
    const TrendDataset rep =
        generate_null_replicate(r.shift, sizes_x, sizes_y, stream);
    const FrequencyTable rep_table =
        build_frequency_table(rep, sel, opt.ties, stream);
    m_star[t] = m_statistic(rep_table);
  });

  std::size_t at_least = 0;
  for (double m : m_star) {
    if (m >= r.m_observed) ++at_least;
  }
  r.p_value = static_cast<double>(at_least) / static_cast<double>(opt.n_boot);
  r.critical_value = upper_order_statistic(m_star, opt.alpha);
  if (opt.keep_sample) r.bootstrap_sample = std::move(m_star);
  return r;
}

}  // namespace detail

// Full procedure from raw data: observed table, pooled estimates, shifts,
// N_b synthetic replicates, critical value and p-value. The p-value counts
// replicates with M* >= M (the conservative reading of "more than").
inline TestResult bootstrap_test(const TrendDataset& data,
                                 const BootstrapOptions& opt) {
  check_dataset(data);
  const PairSelection sel = select_pairs(data);
  rng::Stream observed_stream(
      rng::substream_seed(opt.seed, detail::kObservedStreamIndex));
  const FrequencyTable table =
      build_frequency_table(data, sel, opt.ties, observed_stream);
  TestResult r =
      detail::bootstrap_core(table, sel, data.sizes_a(), data.sizes_b(), opt);
  r.level_labels = data.level_labels;
  return r;
}

// Same procedure starting from a fully specified table (no raw data). The
// sub-sample sizes must reproduce the table's totals over the pairs they
// select.
inline TestResult bootstrap_test_from_table(
    const FrequencyTable& table, std::span<const std::size_t> sizes_x,
    std::span<const std::size_t> sizes_y, const BootstrapOptions& opt) {
  check_table(table);
  if (sizes_x.size() != sizes_y.size() || sizes_x.size() < 2) {
    throw std::invalid_argument("need matching size vectors with >= 2 levels");
  }
  PairSelection sel;
  for (std::size_t l = 0; l + 1 < sizes_x.size(); ++l) {
    if (sizes_x[l] > 0 && sizes_x[l + 1] > 0 && sizes_y[l] > 0 &&
        sizes_y[l + 1] > 0) {
      sel.included.push_back(l);
    }
  }
  if (sel.included.empty()) throw NoComparablePairsError();
  if (sel.included.size() != table.pairs()) {
    throw std::invalid_argument(
        "table has " + std::to_string(table.pairs()) + " pairs but sizes select " +
        std::to_string(sel.included.size()));
  }
  for (std::size_t i = 0; i < sel.included.size(); ++i) {
    const std::size_t l = sel.included[i];
    const auto tx = static_cast<std::int64_t>(sizes_x[l] * sizes_x[l + 1]);
    const auto ty = static_cast<std::int64_t>(sizes_y[l] * sizes_y[l + 1]);
    if (tx != table.tot_x[i] || ty != table.tot_y[i]) {
      throw std::invalid_argument("table totals inconsistent with sizes");
    }
  }
  return detail::bootstrap_core(table, sel, sizes_x, sizes_y, opt);
}

}  // namespace trendtest
