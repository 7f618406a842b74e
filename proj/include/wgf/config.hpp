#pragma once

// Flat key-value configuration files:
//
//   # comment
//   experiment = LINEAR_QUARTIC
//   n = 32
//   mu0 = 30.0      # trailing comments are allowed
//   name = "quoted strings keep # and spaces"
//
// Keys are case-sensitive identifiers; duplicate keys are an error.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wgf {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  /// Comma-separated list of integers.
  std::optional<std::vector<std::int64_t>> get_int_list(const std::string& key) const;

  /// Keys never read through a getter; used to reject typos.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> read_;
  std::string origin_;

  std::optional<std::string> raw(const std::string& key) const;
};

}  // namespace wgf
