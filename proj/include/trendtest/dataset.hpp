#pragma once

// Two groups of ordered sub-samples and the rule for dropping adjacent-pair
// comparisons when a sub-sample on either side is entirely missing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace trendtest {

// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every adjacent pair touches an empty sub-sample (CLI exit code 3).
class NoComparablePairsError : public std::runtime_error {
 public:
  NoComparablePairsError() : std::runtime_error("no comparable pairs") {}
};

// One measurement row: group label, 1-based level, value.
struct Record {
  std::string group;
  long level = 0;
  double value = 0.0;
};

struct TrendDataset {
  std::vector<std::vector<double>> group_a;  // K+1 sub-samples
  std::vector<std::vector<double>> group_b;  // K+1 sub-samples
  std::string label_a = "A";
  std::string label_b = "B";
  std::vector<std::string> level_labels;  // optional display names, K+1 when set

  std::size_t levels() const { return group_a.size(); }
  std::size_t num_pairs() const { return levels() == 0 ? 0 : levels() - 1; }

  std::vector<std::size_t> sizes_a() const {
    std::vector<std::size_t> s;
    s.reserve(group_a.size());
    for (const auto& sub : group_a) s.push_back(sub.size());
    return s;
  }
  std::vector<std::size_t> sizes_b() const {
    std::vector<std::size_t> s;
    s.reserve(group_b.size());
    for (const auto& sub : group_b) s.push_back(sub.size());
    return s;
  }
};

// Adjacent-pair indices retained for analysis, 0-based: pair l compares
// levels l and l+1. A pair is kept only when both groups have data on both
// sides.
struct PairSelection {
  std::vector<std::size_t> included;

  bool contains(std::size_t l) const {
    return std::find(included.begin(), included.end(), l) != included.end();
  }
};

inline void check_dataset(const TrendDataset& d) {
  if (d.group_a.size() != d.group_b.size()) {
    throw DataError("mismatched level counts between groups: " +
                    std::to_string(d.group_a.size()) + " vs " +
                    std::to_string(d.group_b.size()));
  }
  if (d.levels() < 2) {
    throw DataError("fewer than 2 levels");
  }
  if (!d.level_labels.empty() && d.level_labels.size() != d.levels()) {
    throw DataError("level labels must match the number of levels");
  }
  for (const auto* group : {&d.group_a, &d.group_b}) {
    for (const auto& sub : *group) {
      for (double v : sub) {
        if (!std::isfinite(v)) {
          throw DataError("non-finite measurement value");
        }
      }
    }
  }
}

// Builds a dataset from parsed records. Groups are keyed by their label in
// order of first appearance; the level range is 1..max(level) and levels
// with no rows become empty sub-samples.
inline TrendDataset validate(const std::vector<Record>& records) {
  if (records.empty()) throw DataError("no records");

  std::vector<std::string> group_names;
  for (const auto& r : records) {
    if (std::find(group_names.begin(), group_names.end(), r.group) ==
        group_names.end()) {
      group_names.push_back(r.group);
    }
  }
  if (group_names.size() != 2) {
    throw DataError("expected exactly two distinct group labels, found " +
                    std::to_string(group_names.size()));
  }

  long max_level = 0;
  for (const auto& r : records) {
    if (r.level < 1) {
      throw DataError("level must be a positive integer, got " +
                      std::to_string(r.level));
    }
    max_level = std::max(max_level, r.level);
  }

  TrendDataset d;
  d.label_a = group_names[0];
  d.label_b = group_names[1];
  d.group_a.resize(static_cast<std::size_t>(max_level));
  d.group_b.resize(static_cast<std::size_t>(max_level));
  for (const auto& r : records) {
    auto& group = (r.group == d.label_a) ? d.group_a : d.group_b;
    group[static_cast<std::size_t>(r.level - 1)].push_back(r.value);
  }

  check_dataset(d);
  return d;
}

// Flattens a dataset back into records (levels are 1-based).
inline std::vector<Record> to_records(const TrendDataset& d) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < d.levels(); ++i) {
    for (double v : d.group_a[i]) {
      out.push_back({d.label_a, static_cast<long>(i + 1), v});
    }
  }
  for (std::size_t i = 0; i < d.levels(); ++i) {
    for (double v : d.group_b[i]) {
      out.push_back({d.label_b, static_cast<long>(i + 1), v});
    }
  }
  return out;
}

// Keeps pair l iff both groups have data at levels l and l+1. Throws
// NoComparablePairsError when nothing survives.
inline PairSelection select_pairs(const TrendDataset& d) {
  check_dataset(d);
  PairSelection sel;
  for (std::size_t l = 0; l + 1 < d.levels(); ++l) {
    const bool a_ok = !d.group_a[l].empty() && !d.group_a[l + 1].empty();
    const bool b_ok = !d.group_b[l].empty() && !d.group_b[l + 1].empty();
    if (a_ok && b_ok) sel.included.push_back(l);
  }
  if (sel.included.empty()) throw NoComparablePairsError();
  return sel;
}

}  // namespace trendtest
