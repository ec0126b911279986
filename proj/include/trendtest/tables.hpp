#pragma once

// The observed 2x2K frequency table, its expected counterpart under the
// null, and the chi-square-type discrepancy statistic M.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "trendtest/counts.hpp"
#include "trendtest/dataset.hpp"

namespace trendtest {

// Per included pair l: left-cell counts O and pair totals. The complement
// cells of the written-out table are total - O.
struct FrequencyTable {
  std::vector<double> o_x, o_y;
  std::vector<std::int64_t> tot_x, tot_y;

  std::size_t pairs() const { return o_x.size(); }

  double n_tot() const {
    double s = 0.0;
    for (std::size_t l = 0; l < pairs(); ++l) {
      s += static_cast<double>(tot_x[l] + tot_y[l]);
    }
    return s;
  }

  // Share of the grand total contributed by the first (x) row.
  double r_x() const {
    double sx = 0.0;
    for (auto t : tot_x) sx += static_cast<double>(t);
    return sx / n_tot();
  }
};

inline void check_table(const FrequencyTable& t) {
  const std::size_t k = t.pairs();
  if (k == 0) throw std::invalid_argument("frequency table has no pairs");
  if (t.o_y.size() != k || t.tot_x.size() != k || t.tot_y.size() != k) {
    throw std::invalid_argument("frequency table rows have mismatched lengths");
  }
  for (std::size_t l = 0; l < k; ++l) {
    if (t.tot_x[l] <= 0 || t.tot_y[l] <= 0) {
      throw std::invalid_argument("pair totals must be positive");
    }
    if (t.o_x[l] < 0 || t.o_x[l] > static_cast<double>(t.tot_x[l]) ||
        t.o_y[l] < 0 || t.o_y[l] > static_cast<double>(t.tot_y[l])) {
      throw std::invalid_argument("cell count outside [0, total]");
    }
  }
}

inline FrequencyTable build_frequency_table(const TrendDataset& d,
                                            const PairSelection& sel,
                                            TiePolicy policy,
                                            rng::Stream& rng) {
  FrequencyTable t;
  for (std::size_t l : sel.included) {
    const auto cx = pairwise_count(d.group_a[l], d.group_a[l + 1], policy, rng);
    const auto cy = pairwise_count(d.group_b[l], d.group_b[l + 1], policy, rng);
    t.o_x.push_back(cx.o);
    t.tot_x.push_back(cx.total);
    t.o_y.push_back(cy.o);
    t.tot_y.push_back(cy.total);
  }
  return t;
}

struct ExpectedTable {
  std::vector<double> e_x, e_y;  // expected left cells per pair
  double r_x = 0.0;

  // Expected complement cells, derived.
  double c_x(std::size_t l, const FrequencyTable& t) const {
    return r_x * static_cast<double>(t.tot_x[l] + t.tot_y[l]) - e_x[l];
  }
  double c_y(std::size_t l, const FrequencyTable& t) const {
    return (1.0 - r_x) * static_cast<double>(t.tot_x[l] + t.tot_y[l]) - e_y[l];
  }
};

inline ExpectedTable expected_table(const FrequencyTable& t) {
  check_table(t);
  ExpectedTable e;
  e.r_x = t.r_x();
  e.e_x.reserve(t.pairs());
  e.e_y.reserve(t.pairs());
  for (std::size_t l = 0; l < t.pairs(); ++l) {
    const double col = t.o_x[l] + t.o_y[l];
    e.e_x.push_back(col * e.r_x);
    e.e_y.push_back(col * (1.0 - e.r_x));
  }
  return e;
}

// Chi-square-type discrepancy over all 4K cells. A term whose expected
// denominator is exactly zero contributes zero: a zero denominator forces a
// zero numerator in exact arithmetic, and skipping on the denominator alone
// is robust to floating-point residue in the numerator.
inline double m_statistic(const FrequencyTable& t) {
  check_table(t);
  const ExpectedTable e = expected_table(t);
  const double r = e.r_x;
  double m = 0.0;
  for (std::size_t l = 0; l < t.pairs(); ++l) {
    const double tx = static_cast<double>(t.tot_x[l]);
    const double ty = static_cast<double>(t.tot_y[l]);
    const double pair_total = tx + ty;

    const auto add_term = [&m](double obs, double exp) {
      if (exp != 0.0) {
        const double d = obs - exp;
        m += d * d / exp;
      }
    };
    add_term(t.o_x[l], e.e_x[l]);
    add_term(tx - t.o_x[l], r * pair_total - e.e_x[l]);
    add_term(t.o_y[l], e.e_y[l]);
    add_term(ty - t.o_y[l], (1.0 - r) * pair_total - e.e_y[l]);
  }
  return m;
}

}  // namespace trendtest
