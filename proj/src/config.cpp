#include "srd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "srd/errors.hpp"

namespace srd {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char ch : key) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' ||
                    ch == '.' || ch == '-';
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError(what + ": expected a finite number, got '" + t + "'");
  }
  return v;
}

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(part, what));
  return out;
}

Config Config::parse(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (cfg.values_.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(cfg.lines_[key]) + ")");
    }
    cfg.values_[key] = value;
    cfg.lines_[key] = number;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, std::string value) {
  if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
  values_[key] = std::move(value);
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double Config::get_double(const std::string& key) const { return parse_double(raw(key), key); }

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string& t = raw(key);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  }
  return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& t = raw(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + t + "'");
  }
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& t = raw(key);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + t + "'");
}

bool Config::get_bool(const std::string& key, bool fallback) const { return has(key) ? get_bool(key) : fallback; }

std::vector<double> Config::get_vector(const std::string& key) const { return parse_vector(raw(key), key); }

std::vector<std::vector<double>> Config::get_matrix(const std::string& key) const {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(raw(key), ';')) rows.push_back(parse_vector(row, key));
  return rows;
}

void Config::reject_unused() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (used_.count(key)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += key + " (line " + std::to_string(lines_.count(key) ? lines_.at(key) : 0) + ")";
  }
  if (!unknown.empty()) throw ConfigError(source_ + ": unknown or unused keys: " + unknown);
}

}  // namespace srd
