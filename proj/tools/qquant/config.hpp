#pragma once

// Flat key=value configuration for `qquant simulate`.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qquant::cli {

class KeyValueConfig {
 public:
  /// Lines "key = value"; '#' starts a comment; blank lines are ignored.
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.contains(key); }

  /// Throws Errc::invalid_argument "missing config key: <key>".
  const std::string& require(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::uint64_t require_u64(const std::string& key) const;
  std::size_t require_size(const std::string& key) const;
  double require_double(const std::string& key) const;
  std::vector<std::size_t> require_size_list(const std::string& key) const;
  std::vector<double> require_double_list(const std::string& key) const;

  std::size_t size_or(const std::string& key, std::size_t fallback) const;
  double double_or(const std::string& key, double fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> double_list_or(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::size_t> size_list_or(const std::string& key, std::vector<std::size_t> fallback) const;

  /// Throws for any key outside `allowed`.
  void check_keys(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what);
std::uint64_t parse_u64(const std::string& text, const std::string& what);

}  // namespace qquant::cli
