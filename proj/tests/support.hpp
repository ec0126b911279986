#pragma once

// Shared test helpers: dataset builders, a CLI runner and a small JSON
// schema checker covering the subset our published schemas use.

#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trendtest/dataset.hpp"

#ifndef TRENDTEST_CLI_PATH
#define TRENDTEST_CLI_PATH ""
#endif
#ifndef TRENDTEST_DATA_DIR
#define TRENDTEST_DATA_DIR ""
#endif
#ifndef TRENDTEST_SCHEMA_DIR
#define TRENDTEST_SCHEMA_DIR ""
#endif

namespace ttest {

inline trendtest::TrendDataset make_dataset(
    std::vector<std::vector<double>> a, std::vector<std::vector<double>> b) {
  trendtest::TrendDataset d;
  d.group_a = std::move(a);
  d.group_b = std::move(b);
  return d;
}

inline std::string data_file(const std::string& name) {
  return std::string(TRENDTEST_DATA_DIR) + "/" + name;
}

inline std::string schema_file(const std::string& name) {
  return std::string(TRENDTEST_SCHEMA_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("trendtest_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the built CLI with the given argument string, capturing both streams.
inline CliResult run_cli(const std::string& args, const std::string& tag) {
  const auto dir = fresh_temp_dir("cli");
  const auto out_path = dir / (tag + ".out");
  const auto err_path = dir / (tag + ".err");
  const std::string cmd = std::string("\"") + TRENDTEST_CLI_PATH + "\" " +
                          args + " >\"" + out_path.string() + "\" 2>\"" +
                          err_path.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.out = slurp(out_path.string());
  r.err = slurp(err_path.string());
#ifdef _WIN32
  r.exit_code = status;
#else
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
  return r;
}

// Minimal JSON-schema checker: type (string or list), required, properties,
// items, enum. Numbers accept integers; "integer" requires an integral value.
inline bool type_matches(const nlohmann::json& value, const std::string& want) {
  if (want == "object") return value.is_object();
  if (want == "array") return value.is_array();
  if (want == "string") return value.is_string();
  if (want == "boolean") return value.is_boolean();
  if (want == "number") return value.is_number();
  if (want == "integer") return value.is_number_integer();
  if (want == "null") return value.is_null();
  return false;
}

inline void check_schema(const nlohmann::json& value,
                         const nlohmann::json& schema, const std::string& at,
                         std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& want = schema["type"];
    bool ok = false;
    if (want.is_array()) {
      for (const auto& w : want) ok = ok || type_matches(value, w);
    } else {
      ok = type_matches(value, want.get<std::string>());
    }
    if (!ok) {
      errors.push_back(at + ": type mismatch, got " +
                       std::string(value.type_name()));
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& candidate : schema["enum"]) ok = ok || candidate == value;
    if (!ok) errors.push_back(at + ": value not in enum");
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      if (!value.contains(key.get<std::string>())) {
        errors.push_back(at + ": missing required key '" +
                         key.get<std::string>() + "'");
      }
    }
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (value.contains(key)) {
        check_schema(value[key], sub, at + "/" + key, errors);
      }
    }
  }
  if (schema.contains("items") && value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      check_schema(value[i], schema["items"], at + "[" + std::to_string(i) + "]",
                   errors);
    }
  }
}

inline std::vector<std::string> schema_errors(const nlohmann::json& value,
                                              const nlohmann::json& schema) {
  std::vector<std::string> errors;
  check_schema(value, schema, "$", errors);
  return errors;
}

}  // namespace ttest
