#include "wgf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wgf/errors.hpp"

namespace wgf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || !(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_')) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      throw ConfigError(where + "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!key.empty() && key[0] == '#') continue;
    if (!valid_key(key)) throw ConfigError(where + "invalid key '" + key + "'");
    std::string rest = trim(line.substr(eq + 1));
    std::string value;
    if (!rest.empty() && rest[0] == '"') {
      const auto close = rest.find('"', 1);
      if (close == std::string::npos) throw ConfigError(where + "unterminated string");
      value = rest.substr(1, close - 1);
      const std::string tail = trim(rest.substr(close + 1));
      if (!tail.empty() && tail[0] != '#') throw ConfigError(where + "trailing text after string");
    } else {
      value = trim(rest.substr(0, rest.find('#')));
      if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    }
    if (cfg.values_.count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::optional<std::string> KeyValueConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  read_[key] = true;
  return it->second;
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const { return raw(key); }

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size())
    throw ConfigError("key '" + key + "': expected a number, got '" + *v + "'");
  return out;
}

std::optional<std::int64_t> KeyValueConfig::get_int(const std::string& key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    // allow integral values written in float notation, e.g. 5e5
    double d = 0.0;
    const auto [p2, e2] = std::from_chars(v->data(), v->data() + v->size(), d);
    if (e2 != std::errc() || p2 != v->data() + v->size() || d != static_cast<double>(static_cast<std::int64_t>(d)))
      throw ConfigError("key '" + key + "': expected an integer, got '" + *v + "'");
    out = static_cast<std::int64_t>(d);
  }
  return out;
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + *v + "'");
}

std::optional<std::vector<std::int64_t>> KeyValueConfig::get_int_list(const std::string& key) const {
  const auto v = raw(key);
  if (!v) return std::nullopt;
  std::vector<std::int64_t> out;
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    std::int64_t x = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
      throw ConfigError("key '" + key + "': bad list item '" + t + "'");
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

}  // namespace wgf
