#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "optomech/config.hpp"
#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/localization.hpp"

namespace optomech {

/// Fixed 12-significant-digit rendering used for every numeric output.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Column table with `#` metadata lines; rendering is byte-deterministic.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw Error("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
  }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : meta) out << "# " << k << " = " << v << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt(row[c]);
      out << '\n';
    }
  }

  std::string str() const {
    std::ostringstream s;
    write(s);
    return s.str();
  }
};

/// Tool version and config hash, the leading metadata of every output file.
inline CsvTable make_table(const RunConfig& cfg, std::vector<std::string> columns) {
  CsvTable t;
  t.add_meta("tool", std::string(kToolName) + " " + kToolVersion);
  t.add_meta("config_hash", config_hash_hex(cfg));
  t.columns = std::move(columns);
  return t;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

namespace csv_detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(config_detail::trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace csv_detail

/// Reads coupling data with header `i, j, omega_m_Hz, g_Hz`; `#` lines are skipped.
inline std::vector<CouplingMeasurement> read_couplings(std::istream& in) {
  std::vector<CouplingMeasurement> out;
  std::string raw;
  int line = 0;
  bool header = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = config_detail::trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto cells = csv_detail::split(text);
    if (!header) {
      const std::vector<std::string> expected = {"i", "j", "omega_m_Hz", "g_Hz"};
      if (cells != expected)
        throw ConfigError("line " + std::to_string(line) + ": expected header 'i, j, omega_m_Hz, g_Hz'",
                          {}, line);
      header = true;
      continue;
    }
    if (cells.size() != 4)
      throw ConfigError("line " + std::to_string(line) + ": expected 4 columns", {}, line);
    const auto num = [&](std::size_t c, const char* name) {
      return config_detail::parse_real(cells[c], std::string("line ") + std::to_string(line) + " " + name, line);
    };
    const double i = num(0, "i"), j = num(1, "j");
    if (i != std::floor(i) || j != std::floor(j) || i < 1 || j < 1)
      throw ConfigError("line " + std::to_string(line) + ": mode indices must be positive integers", {}, line);
    const double w = num(2, "omega_m_Hz"), g = num(3, "g_Hz");
    if (!(w > 0.0) || !(g >= 0.0))
      throw ConfigError("line " + std::to_string(line) + ": need omega_m_Hz > 0 and g_Hz >= 0", {}, line);
    out.push_back({static_cast<int>(i), static_cast<int>(j), to_angular(g), to_angular(w)});
  }
  if (!header) throw ConfigError("coupling file has no header");
  return out;
}

inline std::vector<CouplingMeasurement> read_couplings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coupling file '" + path + "'");
  return read_couplings(in);
}

inline CsvTable couplings_table(const RunConfig& cfg, const std::vector<CouplingMeasurement>& ms) {
  CsvTable t = make_table(cfg, {"i", "j", "omega_m_Hz", "g_Hz"});
  for (const auto& m : ms)
    t.add_row({double(m.index_i), double(m.index_j), to_hz(m.omega_m), to_hz(m.g_meas)});
  return t;
}

}  // namespace optomech
