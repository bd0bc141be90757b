#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace srd {

// Flat key = value configuration.
//
//   # comment (whole line or trailing)
//   key = value
//
// Keys use [A-Za-z0-9_.-]; values are trimmed. Vectors are comma-separated
// numbers, matrices are rows of vectors separated by ';'. Duplicate keys and
// malformed lines are rejected. Every lookup marks its key as used so
// `reject_unused` can refuse keys nobody asked for.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_vector(const std::string& key) const;
  std::vector<std::vector<double>> get_matrix(const std::string& key) const;

  // Throws ConfigError naming every key that was never looked up.
  void reject_unused() const;
  const std::string& source() const { return source_; }

 private:
  const std::string& raw(const std::string& key) const;

  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  mutable std::set<std::string> used_;
};

double parse_double(const std::string& text, const std::string& what);
std::vector<double> parse_vector(const std::string& text, const std::string& what);

}  // namespace srd
