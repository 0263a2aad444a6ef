#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fbsde/core/errors.hpp"

namespace fbsde::cli {

// 17 significant digits: enough to round-trip any double.
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string cell(double v) { return csv_number(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }
inline std::string cell(const std::string& v) { return v; }
inline std::string cell(const char* v) { return v; }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Small RFC 4180 table: CRLF records, header first, quoted when needed.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... Cells>
  void add(const Cells&... cells) {
    if (sizeof...(Cells) != header_.size()) {
      throw ContractViolation("CsvTable: row has " + std::to_string(sizeof...(Cells)) +
                              " cells, header has " + std::to_string(header_.size()));
    }
    rows_.push_back({cell(cells)...});
  }

  void add_cells(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
      throw ContractViolation("CsvTable: row has " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(header_.size()));
    }
    rows_.push_back(std::move(cells));
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_field(cells[i]);
      }
      out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + path + "'");
    f << str();
    if (!f) throw InvalidArgument("failed writing '" + path + "'");
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fbsde::cli
