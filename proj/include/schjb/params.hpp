#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "schjb/problem.hpp"

namespace schjb {

/// Raised for malformed configuration: bad syntax, unknown keys, values out
/// of range. Messages carry the "section.key" path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A config value: number, string, boolean or list of numbers.
using ParamValue = std::variant<double, std::string, bool, std::vector<double>>;
using ParamMap = std::map<std::string, ParamValue>;

/// Typed access to one config section. Remembers which keys were read so
/// leftovers can be rejected by finish().
class ParamReader {
 public:
  ParamReader(const ParamMap& params, std::string section) : params_(params), section_(std::move(section)) {}

  bool has(const std::string& key) const { return params_.count(key) > 0; }
  std::string path(const std::string& key) const { return section_ + "." + key; }

  double number(const std::string& key, double fallback) {
    const ParamValue* v = find(key);
    if (!v) return fallback;
    if (const double* d = std::get_if<double>(v)) return *d;
    throw ConfigError(path(key) + " must be a number");
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(path(key) + " must be positive");
    return v;
  }

  double nonnegative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v >= 0.0)) throw ConfigError(path(key) + " must be nonnegative");
    return v;
  }

  /// Positive integer no larger than `max`.
  long long integer(const std::string& key, long long fallback, long long max) {
    const double v = number(key, static_cast<double>(fallback));
    if (v != static_cast<double>(static_cast<long long>(v)) || v < 1 || v > static_cast<double>(max)) {
      throw ConfigError(path(key) + " must be an integer in [1, " + std::to_string(max) + "]");
    }
    return static_cast<long long>(v);
  }

  bool flag(const std::string& key, bool fallback) {
    const ParamValue* v = find(key);
    if (!v) return fallback;
    if (const bool* b = std::get_if<bool>(v)) return *b;
    throw ConfigError(path(key) + " must be true or false");
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const ParamValue* v = find(key);
    if (!v) return fallback;
    if (const std::string* s = std::get_if<std::string>(v)) return *s;
    throw ConfigError(path(key) + " must be a string");
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    const ParamValue* v = find(key);
    if (!v) return fallback;
    if (const auto* l = std::get_if<std::vector<double>>(v)) return *l;
    if (const double* d = std::get_if<double>(v)) return {*d};
    throw ConfigError(path(key) + " must be a list of numbers");
  }

  void finish() const {
    for (const auto& entry : params_) {
      if (!used_.count(entry.first)) throw ConfigError("unknown key \"" + path(entry.first) + "\"");
    }
  }

 private:
  const ParamValue* find(const std::string& key) {
    auto it = params_.find(key);
    if (it == params_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  const ParamMap& params_;
  std::string section_;
  std::set<std::string> used_;
};

}  // namespace schjb
