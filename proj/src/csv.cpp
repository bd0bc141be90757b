#include "srd/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "srd/errors.hpp"

namespace srd {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalError("refusing to serialize a non-finite value");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

std::string format_vector(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CsvTable: row width does not match header");
  for (const auto& c : cells) {
    if (c.find_first_of(",\n\r") != std::string::npos) throw std::invalid_argument("CsvTable: cell contains a separator");
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::string out;
  const auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

CsvTable CsvTable::parse(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    cells.push_back(cur);
    lines.push_back(std::move(cells));
  }
  if (lines.empty()) throw std::invalid_argument("CsvTable::parse: empty input");
  CsvTable table(lines.front());
  for (std::size_t i = 1; i < lines.size(); ++i) table.add_row(lines[i]);
  return table;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw std::out_of_range("CsvTable: no column '" + name + "'");
}

std::optional<double> parse_cell_double(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw std::invalid_argument("parse_cell_double: bad number '" + cell + "'");
  }
  return v;
}

std::vector<double> parse_cell_vector(const std::string& cell) {
  std::vector<double> out;
  if (cell.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto end = cell.find(';', start);
    out.push_back(*parse_cell_double(cell.substr(start, end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

}  // namespace srd
