#pragma once

// Mann-Whitney-style pairwise counting between adjacent sub-samples.
//
// The count O sums an indicator over all (lower, upper) value pairs:
// 1 when lower < upper, 0 when lower > upper. Exact ties covered by the
// tie policy score 0.5 (expected_half) or a fair coin (random_coin); ties
// outside the policy's scope score 0 like the strict indicator.

#include <cstdint>
#include <span>
#include <stdexcept>

#include "trendtest/rng.hpp"

namespace trendtest {

enum class TieMode { expected_half, random_coin };
enum class TieScope { zero_zero_pairs, all_exact_ties };

struct TiePolicy {
  TieMode mode = TieMode::expected_half;
  TieScope scope = TieScope::all_exact_ties;
};

struct PairCount {
  double o = 0.0;          // multiples of 0.5 under expected_half
  std::int64_t total = 0;  // |lower| * |upper|

  double p_hat() const { return o / static_cast<double>(total); }
};

inline PairCount pairwise_count(std::span<const double> lower,
                                std::span<const double> upper,
                                TiePolicy policy, rng::Stream& rng) {
  if (lower.empty() || upper.empty()) {
    throw std::invalid_argument("pairwise_count: empty sub-sample");
  }
  PairCount out;
  out.total = static_cast<std::int64_t>(lower.size()) *
              static_cast<std::int64_t>(upper.size());
  for (double u : lower) {
    for (double v : upper) {
      if (u < v) {
        out.o += 1.0;
      } else if (u == v) {
        const bool in_scope = policy.scope == TieScope::all_exact_ties ||
                              (u == 0.0 && v == 0.0);
        if (in_scope) {
          if (policy.mode == TieMode::expected_half) {
            out.o += 0.5;
          } else if (rng.coin()) {
            out.o += 1.0;
          }
        }
      }
    }
  }
  return out;
}

inline double estimate_p(const PairCount& count) {
  if (count.total <= 0) {
    throw std::invalid_argument("estimate_p: nonpositive pair total");
  }
  return count.p_hat();
}

// Position-by-position estimator for equal-size sub-samples. Kept for
// benchmarking against the pairwise estimator; the pipeline does not use it.
inline double naive_paired_estimate(std::span<const double> lower,
                                    std::span<const double> upper) {
  if (lower.size() != upper.size() || lower.empty()) {
    throw std::invalid_argument(
        "naive_paired_estimate: sub-samples must have equal nonzero sizes");
  }
  std::int64_t hits = 0;
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (lower[j] < upper[j]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(lower.size());
}

}  // namespace trendtest
