#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lite::io {

// Plain-text "key = value" document. Blank lines and lines starting with '#'
// are ignored; keys are unique. Lists are comma separated.
class KvDocument {
 public:
  KvDocument() = default;

  static KvDocument parse(std::string_view text, std::string_view origin = "<text>");
  static KvDocument load(const std::string& path);

  std::string serialize() const;

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void erase(const std::string& key) { values_.erase(key); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  // Typed getters throw ConfigError naming the key when it is missing or
  // cannot be parsed.
  std::string get_string(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;

  // Keys not listed in `known`; used to reject typos.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

std::string join_ints(const std::vector<int>& values);
std::string join_doubles(const std::vector<double>& values);
// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace lite::io
