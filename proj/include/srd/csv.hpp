#pragma once

#include <optional>
#include <string>
#include <vector>

namespace srd {

// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);
// Vector entries joined with ';'.
std::string format_vector(const std::vector<double>& v);

// Comma-separated table with a header row and LF line endings. Cells never
// contain commas, so no quoting is needed.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string to_string() const;
  static CsvTable parse(const std::string& text);

  // Column lookup for parsed tables.
  std::size_t column(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Inverse of format_double/format_vector; empty cells map to nullopt/empty.
std::optional<double> parse_cell_double(const std::string& cell);
std::vector<double> parse_cell_vector(const std::string& cell);

// Writes text to path, or to stdout when path is empty.
void write_text(const std::string& path, const std::string& text);

}  // namespace srd
