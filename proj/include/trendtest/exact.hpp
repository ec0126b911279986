#pragma once

// Exact and empirical distributions of a single pairwise count O, used as
// diagnostics and small-sample cross-checks.
//
// exact_pmf evaluates the size-reduction recurrence
//   Pr_{n1,n2}(k) = n1/(n1+n2) Pr_{n1-1,n2}(k) + n2/(n1+n2) Pr_{n1,n2-1}(k-n1)
// with the binomial base case Pr_{1,t}(s) = Pr_{t,1}(s) = C(t,s) p^s (1-p)^(t-s),
// exactly as written. Note it does not reproduce the uniform-permutation law
// even at p = 1/2 (Pr_{2,2}(0) = 1/8 vs 1/6); permutation_pmf and
// mc_count_pmf exist to surface that discrepancy, not to repair it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "trendtest/rng.hpp"

namespace trendtest {

struct ExactPmf {
  int n1 = 0;
  int n2 = 0;
  double p = std::numeric_limits<double>::quiet_NaN();  // NaN when parameter-free
  std::vector<double> mass;                             // index k = 0..n1*n2

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k) {
      m += static_cast<double>(k) * mass[k];
    }
    return m;
  }
};

namespace detail {

inline std::vector<double> binomial_pmf(int t, double p) {
  std::vector<double> mass(static_cast<std::size_t>(t) + 1);
  // Exact coefficients (t stays small here), explicit powers.
  double coeff = 1.0;
  for (int s = 0; s <= t; ++s) {
    if (s > 0) coeff = coeff * static_cast<double>(t - s + 1) / s;
    mass[static_cast<std::size_t>(s)] =
        coeff * std::pow(p, s) * std::pow(1.0 - p, t - s);
  }
  return mass;
}

}  // namespace detail

// Bottom-up DP over effective sizes (a, b). The recurrence is never applied
// when min(a, b) = 1; those cells take the binomial base case directly.
inline ExactPmf exact_pmf(int n1, int n2, double p) {
  if (n1 < 1 || n2 < 1) {
    throw std::invalid_argument("exact_pmf: sizes must be positive");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("exact_pmf: p must lie in [0, 1]");
  }
  if (static_cast<std::int64_t>(n1) * n2 > 10000) {
    throw std::invalid_argument("exact_pmf: n1*n2 too large (cap 10000)");
  }

  // dp[a][b] holds the pmf for sizes (a+1, b+1) over k = 0..(a+1)(b+1).
  std::vector<std::vector<std::vector<double>>> dp(
      static_cast<std::size_t>(n1),
      std::vector<std::vector<double>>(static_cast<std::size_t>(n2)));
  for (int a = 1; a <= n1; ++a) {
    for (int b = 1; b <= n2; ++b) {
      auto& cell = dp[a - 1][b - 1];
      if (a == 1 || b == 1) {
        cell = detail::binomial_pmf(a == 1 ? b : a, p);
        continue;
      }
      const auto& drop_upper = dp[a - 2][b - 1];  // sizes (a-1, b), same k
      const auto& drop_lower = dp[a - 1][b - 2];  // sizes (a, b-1), k shifted by a
      const double wa = static_cast<double>(a) / (a + b);
      const double wb = static_cast<double>(b) / (a + b);
      cell.assign(static_cast<std::size_t>(a) * b + 1, 0.0);
      for (std::size_t k = 0; k < cell.size(); ++k) {
        double v = 0.0;
        if (k < drop_upper.size()) v += wa * drop_upper[k];
        if (k >= static_cast<std::size_t>(a) &&
            k - a < drop_lower.size()) {
          v += wb * drop_lower[k - a];
        }
        cell[k] = v;
      }
    }
  }

  ExactPmf out;
  out.n1 = n1;
  out.n2 = n2;
  out.p = p;
  out.mass = std::move(dp[n1 - 1][n2 - 1]);
  return out;
}

// Distribution of the count over all C(n1+n2, n1) equally likely
// interleavings of the combined sample (no ties), by direct enumeration.
inline ExactPmf permutation_pmf(int n1, int n2) {
  if (n1 < 1 || n2 < 1) {
    throw std::invalid_argument("permutation_pmf: sizes must be positive");
  }
  if (n1 + n2 > 14) {
    throw std::invalid_argument("permutation_pmf: n1+n2 must be <= 14");
  }
  ExactPmf out;
  out.n1 = n1;
  out.n2 = n2;
  out.mass.assign(static_cast<std::size_t>(n1) * n2 + 1, 0.0);

  // Labels in ascending value order: 0 = lower sub-sample, 1 = upper.
  std::vector<int> labels(static_cast<std::size_t>(n1), 0);
  labels.resize(static_cast<std::size_t>(n1 + n2), 1);
  std::sort(labels.begin(), labels.end());
  std::size_t orderings = 0;
  do {
    int lowers_seen = 0;
    int count = 0;
    for (int lab : labels) {
      if (lab == 0) {
        ++lowers_seen;
      } else {
        count += lowers_seen;
      }
    }
    out.mass[static_cast<std::size_t>(count)] += 1.0;
    ++orderings;
  } while (std::next_permutation(labels.begin(), labels.end()));

  for (double& m : out.mass) m /= static_cast<double>(orderings);
  return out;
}

// Empirical count distribution from n_sims draws of X ~ N(0,1)^n1 against
// Y ~ N(h,1)^n2 with strict counting.
inline ExactPmf mc_count_pmf(int n1, int n2, double h, int n_sims,
                             std::uint64_t seed) {
  if (n1 < 1 || n2 < 1) {
    throw std::invalid_argument("mc_count_pmf: sizes must be positive");
  }
  if (n_sims < 1) {
    throw std::invalid_argument("mc_count_pmf: n_sims must be positive");
  }
  ExactPmf out;
  out.n1 = n1;
  out.n2 = n2;
  out.mass.assign(static_cast<std::size_t>(n1) * n2 + 1, 0.0);
  rng::Stream stream(seed);
  std::vector<double> x(static_cast<std::size_t>(n1));
  std::vector<double> y(static_cast<std::size_t>(n2));
  for (int s = 0; s < n_sims; ++s) {
    for (double& v : x) v = stream.normal();
    for (double& v : y) v = stream.normal(h);
    int count = 0;
    for (double xv : x) {
      for (double yv : y) {
        if (xv < yv) ++count;
      }
    }
    out.mass[static_cast<std::size_t>(count)] += 1.0;
  }
  for (double& m : out.mass) m /= static_cast<double>(n_sims);
  return out;
}

// Half the L1 distance between two pmfs on the same support.
inline double total_variation(const ExactPmf& a, const ExactPmf& b) {
  if (a.mass.size() != b.mass.size()) {
    throw std::invalid_argument("total_variation: support mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.mass.size(); ++k) {
    s += std::fabs(a.mass[k] - b.mass[k]);
  }
  return 0.5 * s;
}

}  // namespace trendtest
