#pragma once

// File formats: the measurement CSV (group,level,value records), the fixed
// frequency-table spec used by the power tools, and small helpers shared by
// the CLI.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trendtest/dataset.hpp"
#include "trendtest/tables.hpp"

namespace trendtest {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) +
                    ": cannot parse number '" + s + "'");
  }
}

inline long parse_long(const std::string& s, std::size_t line_no) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) +
                    ": cannot parse integer '" + s + "'");
  }
  return v;
}

}  // namespace detail

// Reads measurement records from CSV with a header naming at least the
// columns group, level, value (any order; extra columns are ignored).
inline std::vector<Record> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    header = detail::split_csv_line(line);
    break;
  }
  if (header.empty()) throw DataError("empty CSV input");

  long gi = -1, li = -1, vi = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "group") gi = static_cast<long>(i);
    if (header[i] == "level") li = static_cast<long>(i);
    if (header[i] == "value") vi = static_cast<long>(i);
  }
  if (gi < 0 || li < 0 || vi < 0) {
    throw DataError("CSV header must contain group, level and value columns");
  }

  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    Record r;
    r.group = fields[static_cast<std::size_t>(gi)];
    r.level = detail::parse_long(fields[static_cast<std::size_t>(li)], line_no);
    r.value = detail::parse_double(fields[static_cast<std::size_t>(vi)], line_no);
    if (!std::isfinite(r.value)) {
      throw DataError("line " + std::to_string(line_no) +
                      ": non-finite value");
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<Record> read_records_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_records_csv(in);
}

inline void write_records_csv(std::ostream& out,
                              const std::vector<Record>& records) {
  out << "group,level,value\n";
  for (const auto& r : records) {
    out << r.group << ',' << r.level << ',';
    std::ostringstream v;
    v.precision(17);
    v << r.value;
    out << v.str() << '\n';
  }
}

// A frequency table together with the sub-sample sizes that produced it;
// enough to drive the bootstrap without raw data. Text format, one labeled
// row per line ('#' lines are comments):
//
//   sizes_x,5,5,5,5
//   sizes_y,5,5,5,5
//   x,20,5,10,15,20,5
//   y,15,10,15,10,20,5
//
// The x / y rows alternate O and total-O cells, one pair of cells per
// retained comparison.
struct TableSpec {
  std::vector<std::size_t> sizes_x, sizes_y;
  FrequencyTable table;
};

inline TableSpec read_table_spec(std::istream& in) {
  std::vector<std::size_t> sizes_x, sizes_y;
  std::vector<double> row_x, row_y;
  bool have_x = false, have_y = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = detail::split_csv_line(t);
    const std::string& tag = fields[0];
    const auto numbers = [&](auto& dst) {
      for (std::size_t i = 1; i < fields.size(); ++i) {
        dst.push_back(detail::parse_double(fields[i], line_no));
      }
    };
    if (tag == "sizes_x" || tag == "sizes_y") {
      auto& dst = (tag == "sizes_x") ? sizes_x : sizes_y;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        const long v = detail::parse_long(fields[i], line_no);
        if (v < 0) throw DataError("line " + std::to_string(line_no) +
                                   ": sizes must be >= 0");
        dst.push_back(static_cast<std::size_t>(v));
      }
    } else if (tag == "x") {
      numbers(row_x);
      have_x = true;
    } else if (tag == "y") {
      numbers(row_y);
      have_y = true;
    } else {
      throw DataError("line " + std::to_string(line_no) +
                      ": unknown row tag '" + tag + "'");
    }
  }
  if (sizes_x.empty() || sizes_y.empty() || !have_x || !have_y) {
    throw DataError("table spec needs sizes_x, sizes_y, x and y rows");
  }
  if (sizes_x.size() != sizes_y.size() || sizes_x.size() < 2) {
    throw DataError("sizes_x and sizes_y must match with >= 2 levels");
  }

  std::vector<std::size_t> included;
  for (std::size_t l = 0; l + 1 < sizes_x.size(); ++l) {
    if (sizes_x[l] > 0 && sizes_x[l + 1] > 0 && sizes_y[l] > 0 &&
        sizes_y[l + 1] > 0) {
      included.push_back(l);
    }
  }
  if (included.empty()) throw NoComparablePairsError();
  if (row_x.size() != 2 * included.size() ||
      row_y.size() != 2 * included.size()) {
    throw DataError("count rows must have " +
                    std::to_string(2 * included.size()) +
                    " cells (O and total-O per retained pair)");
  }

  TableSpec spec;
  spec.sizes_x = std::move(sizes_x);
  spec.sizes_y = std::move(sizes_y);
  for (std::size_t i = 0; i < included.size(); ++i) {
    const std::size_t l = included[i];
    const auto tx =
        static_cast<std::int64_t>(spec.sizes_x[l] * spec.sizes_x[l + 1]);
    const auto ty =
        static_cast<std::int64_t>(spec.sizes_y[l] * spec.sizes_y[l + 1]);
    const double ox = row_x[2 * i], cx = row_x[2 * i + 1];
    const double oy = row_y[2 * i], cy = row_y[2 * i + 1];
    if (ox + cx != static_cast<double>(tx) ||
        oy + cy != static_cast<double>(ty)) {
      throw DataError("pair " + std::to_string(l + 1) +
                      ": cells do not sum to the size product");
    }
    spec.table.o_x.push_back(ox);
    spec.table.o_y.push_back(oy);
    spec.table.tot_x.push_back(tx);
    spec.table.tot_y.push_back(ty);
  }
  check_table(spec.table);
  return spec;
}

inline TableSpec read_table_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_table_spec(in);
}

inline void write_table_spec(std::ostream& out, const TableSpec& spec) {
  const auto row = [&out](const char* tag, const auto& vals) {
    out << tag;
    for (const auto& v : vals) out << ',' << v;
    out << '\n';
  };
  row("sizes_x", spec.sizes_x);
  row("sizes_y", spec.sizes_y);
  out << "x";
  for (std::size_t l = 0; l < spec.table.pairs(); ++l) {
    out << ',' << spec.table.o_x[l] << ','
        << static_cast<double>(spec.table.tot_x[l]) - spec.table.o_x[l];
  }
  out << "\ny";
  for (std::size_t l = 0; l < spec.table.pairs(); ++l) {
    out << ',' << spec.table.o_y[l] << ','
        << static_cast<double>(spec.table.tot_y[l]) - spec.table.o_y[l];
  }
  out << '\n';
}

// FNV-1a 64-bit, used for input checksums in run manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

}  // namespace trendtest
