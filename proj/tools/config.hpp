#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace shelab::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { Real, Int, Bool, Text, Choice, RealList, Path };

struct KeySpec {
  std::string section;
  std::string key;
  KeyType type;
  std::string default_value;
  std::string doc;  // meaning and unit
  std::vector<std::string> choices;
};

const std::vector<KeySpec>& schema();

/// Validated configuration: every schema key present, defaults materialized.
class Config {
 public:
  /// Parses `text` (reported as `origin` in errors) and applies overrides of
  /// the form section.key=value, in order.
  static Config parse(const std::string& text, const std::string& origin,
                      const std::vector<std::string>& overrides = {});
  static Config load(const std::string& path, const std::vector<std::string>& overrides = {});

  double real(const std::string& section, const std::string& key) const;
  long long integer(const std::string& section, const std::string& key) const;
  std::uint64_t u64(const std::string& section, const std::string& key) const;
  bool boolean(const std::string& section, const std::string& key) const;
  const std::string& text(const std::string& section, const std::string& key) const;
  std::vector<double> reals(const std::string& section, const std::string& key) const;
  /// Path values resolved against the directory of the config file.
  std::string path(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Canonical text: schema order, one key per line, defaults included.
  /// full = false drops keys that cannot change results ([output], threads).
  std::string resolved(bool full = true) const;
  /// FNV-1a over resolved(false), as 16 hex digits.
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> raw value
  std::string base_dir_;
};

std::uint64_t fnv1a(const std::string& data);

}  // namespace shelab::cli
