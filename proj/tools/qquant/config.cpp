#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "qquant/error.hpp"
#include "qquant/io.hpp"

namespace qquant::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Error bad_value(const std::string& what, const std::string& text) {
  return Error(Errc::invalid_argument, "invalid value for " + what + ": '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

}  // namespace

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  const auto t = trim(text);
  std::uint64_t value = 0;
  const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || result.ec != std::errc() || result.ptr != t.data() + t.size()) throw bad_value(what, text);
  return value;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    const auto value = parse_double(item);
    if (!value) throw bad_value(what, text);
    out.push_back(*value);
  }
  if (out.empty()) throw bad_value(what, text);
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    // "a..b" expands to consecutive powers of two, e.g. 2..32.
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const auto lo = parse_u64(item.substr(0, dots), what);
      const auto hi = parse_u64(item.substr(dots + 2), what);
      if (lo == 0 || hi < lo) throw bad_value(what, text);
      for (auto v = lo; v <= hi; v *= 2) out.push_back(static_cast<std::size_t>(v));
      continue;
    }
    out.push_back(static_cast<std::size_t>(parse_u64(item, what)));
  }
  if (out.empty()) throw bad_value(what, text);
  return out;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig config;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::invalid_argument, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(Errc::invalid_argument, "config line " + std::to_string(line_no) + ": empty key");
    config.values_[key] = trim(line.substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const std::string& KeyValueConfig::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::invalid_argument, "missing config key: " + key);
  return it->second;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t KeyValueConfig::require_u64(const std::string& key) const { return parse_u64(require(key), key); }

std::size_t KeyValueConfig::require_size(const std::string& key) const {
  return static_cast<std::size_t>(parse_u64(require(key), key));
}

double KeyValueConfig::require_double(const std::string& key) const {
  const auto& text = require(key);
  const auto value = parse_double(text);
  if (!value) throw bad_value(key, text);
  return *value;
}

std::vector<std::size_t> KeyValueConfig::require_size_list(const std::string& key) const {
  return parse_size_list(require(key), key);
}

std::vector<double> KeyValueConfig::require_double_list(const std::string& key) const {
  return parse_double_list(require(key), key);
}

std::size_t KeyValueConfig::size_or(const std::string& key, std::size_t fallback) const {
  return has(key) ? require_size(key) : fallback;
}

double KeyValueConfig::double_or(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

bool KeyValueConfig::bool_or(const std::string& key, bool fallback) const {
  const auto value = get(key);
  if (!value) return fallback;
  if (*value == "true" || *value == "1" || *value == "yes") return true;
  if (*value == "false" || *value == "0" || *value == "no") return false;
  throw bad_value(key, *value);
}

std::string KeyValueConfig::string_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::vector<double> KeyValueConfig::double_list_or(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? require_double_list(key) : fallback;
}

std::vector<std::size_t> KeyValueConfig::size_list_or(const std::string& key,
                                                      std::vector<std::size_t> fallback) const {
  return has(key) ? require_size_list(key) : fallback;
}

void KeyValueConfig::check_keys(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.contains(key)) throw Error(Errc::invalid_argument, "unknown config key: " + key);
  }
}

}  // namespace qquant::cli
