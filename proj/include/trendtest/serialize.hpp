#pragma once

// JSON serialization of results, reports and configs (nlohmann::json).

#include <string>

#include <json.hpp>

#include "trendtest/bootstrap.hpp"
#include "trendtest/exact.hpp"
#include "trendtest/simulation.hpp"

namespace trendtest {

inline const char* to_string(TieMode m) {
  return m == TieMode::expected_half ? "expected_half" : "random_coin";
}

inline const char* to_string(TieScope s) {
  return s == TieScope::all_exact_ties ? "all_exact_ties" : "zero_zero_pairs";
}

inline const char* to_string(LocationFamily f) {
  return f == LocationFamily::normal ? "normal" : "logistic";
}

inline TieMode tie_mode_from_string(const std::string& s) {
  if (s == "expected_half") return TieMode::expected_half;
  if (s == "random_coin") return TieMode::random_coin;
  throw std::invalid_argument("unknown tie mode '" + s + "'");
}

inline TieScope tie_scope_from_string(const std::string& s) {
  if (s == "all_exact_ties") return TieScope::all_exact_ties;
  if (s == "zero_zero_pairs") return TieScope::zero_zero_pairs;
  throw std::invalid_argument("unknown tie scope '" + s + "'");
}

inline LocationFamily family_from_string(const std::string& s) {
  if (s == "normal") return LocationFamily::normal;
  if (s == "logistic") return LocationFamily::logistic;
  throw std::invalid_argument("unknown location family '" + s + "'");
}

inline void to_json(nlohmann::json& j, const TiePolicy& p) {
  j = {{"mode", to_string(p.mode)}, {"scope", to_string(p.scope)}};
}

inline void from_json(const nlohmann::json& j, TiePolicy& p) {
  p.mode = tie_mode_from_string(j.at("mode").get<std::string>());
  p.scope = tie_scope_from_string(j.at("scope").get<std::string>());
}

inline void to_json(nlohmann::json& j, const FrequencyTable& t) {
  nlohmann::json row_x = nlohmann::json::array();
  nlohmann::json row_y = nlohmann::json::array();
  for (std::size_t l = 0; l < t.pairs(); ++l) {
    row_x.push_back(t.o_x[l]);
    row_x.push_back(static_cast<double>(t.tot_x[l]) - t.o_x[l]);
    row_y.push_back(t.o_y[l]);
    row_y.push_back(static_cast<double>(t.tot_y[l]) - t.o_y[l]);
  }
  j = {{"o_x", t.o_x},     {"o_y", t.o_y},   {"tot_x", t.tot_x},
       {"tot_y", t.tot_y}, {"row_x", row_x}, {"row_y", row_y},
       {"r_x", t.r_x()},   {"n_tot", t.n_tot()}};
}

// Full test report: headline numbers plus a per-pair breakdown. Pair
// indices are 1-based in reports.
inline void to_json(nlohmann::json& j, const TestResult& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t i = 0; i < r.included.size(); ++i) {
    const std::size_t l = r.included[i];
    pairs.push_back(
        {{"pair", l + 1},
         {"o_x", r.table.o_x[i]},
         {"tot_x", r.table.tot_x[i]},
         {"p_x", r.table.o_x[i] / static_cast<double>(r.table.tot_x[i])},
         {"o_y", r.table.o_y[i]},
         {"tot_y", r.table.tot_y[i]},
         {"p_y", r.table.o_y[i] / static_cast<double>(r.table.tot_y[i])},
         {"p_pooled", r.pooled.p_pooled[i]},
         {"clamped", static_cast<bool>(r.pooled.clamped[i])},
         {"shift_upper", r.shift.h[l + 1]}});
  }

  nlohmann::json dropped = nlohmann::json::array();
  nlohmann::json dropped_one_sided = nlohmann::json::array();
  const std::size_t levels = r.sizes_x.size();
  for (std::size_t l = 0; l + 1 < levels; ++l) {
    bool inc = false;
    for (std::size_t kept : r.included) inc = inc || kept == l;
    if (inc) continue;
    dropped.push_back(l + 1);
    const bool x_has = r.sizes_x[l] > 0 && r.sizes_x[l + 1] > 0;
    const bool y_has = r.sizes_y[l] > 0 && r.sizes_y[l + 1] > 0;
    if (x_has != y_has) dropped_one_sided.push_back(l + 1);
  }

  j = {{"m_observed", r.m_observed},
       {"critical_value", r.critical_value},
       {"p_value", r.p_value},
       {"alpha", r.alpha},
       {"n_boot", r.n_boot},
       {"seed", r.seed},
       {"reject", r.reject()},
       {"tie_policy", r.ties},
       {"levels", levels},
       {"sizes_x", r.sizes_x},
       {"sizes_y", r.sizes_y},
       {"included_pairs", nlohmann::json::array()},
       {"dropped_pairs", dropped},
       {"dropped_pairs_one_sided", dropped_one_sided},
       {"pairs", pairs},
       {"table", r.table}};
  for (std::size_t l : r.included) j["included_pairs"].push_back(l + 1);
  if (!r.level_labels.empty()) j["level_labels"] = r.level_labels;
  if (!r.bootstrap_sample.empty()) j["bootstrap_sample"] = r.bootstrap_sample;
}

// Thread count is accepted on input but never echoed: results are
// independent of it by the substream contract.
inline void to_json(nlohmann::json& j, const SimConfig& c) {
  j = {{"sizes_x", c.sizes_x}, {"sizes_y", c.sizes_y},
       {"n_rep", c.n_rep},     {"n_boot", c.n_boot},
       {"alpha", c.alpha},     {"seed", c.seed},
       {"family", to_string(c.family)}};
  if (!c.true_p.empty()) j["true_p"] = c.true_p;
  if (!c.true_p_x.empty()) j["true_p_x"] = c.true_p_x;
  if (!c.true_p_y.empty()) j["true_p_y"] = c.true_p_y;
}

inline void from_json(const nlohmann::json& j, SimConfig& c) {
  j.at("sizes_x").get_to(c.sizes_x);
  j.at("sizes_y").get_to(c.sizes_y);
  if (j.contains("true_p")) j.at("true_p").get_to(c.true_p);
  if (j.contains("true_p_x")) j.at("true_p_x").get_to(c.true_p_x);
  if (j.contains("true_p_y")) j.at("true_p_y").get_to(c.true_p_y);
  if (j.contains("n_rep")) c.n_rep = j.at("n_rep").get<int>();
  if (j.contains("n_boot")) c.n_boot = j.at("n_boot").get<int>();
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("family")) {
    c.family = family_from_string(j.at("family").get<std::string>());
  }
}

inline void to_json(nlohmann::json& j, const SimReport& r) {
  j = {{"err", r.err},
       {"wall_time_s", r.wall_time_s},
       {"config", r.config}};
  if (!r.rep_pvalues.empty()) j["rep_pvalues"] = r.rep_pvalues;
}

inline void to_json(nlohmann::json& j, const ExactPmf& pmf) {
  j = {{"n1", pmf.n1}, {"n2", pmf.n2}, {"mass", pmf.mass}};
  if (!std::isnan(pmf.p)) j["p"] = pmf.p;
}

}  // namespace trendtest
