#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rar/core_model.hpp"
#include "rar/gaussian_sim.hpp"

namespace rar {

/// Flat `key = value` file. `#` starts a comment; keys may repeat (get_all keeps order).
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in);
  static KeyValueFile parse_string(const std::string& text);
  static KeyValueFile load(const std::string& path);

  /// Replaces the last entry with this key (the one get() returns), or appends.
  void set(const std::string& key, const std::string& value);
  void add(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::string> split_list(const std::string& value, char delim = ',');
std::vector<double> parse_doubles(const std::string& value);
double parse_double(const std::string& value);
long long parse_int(const std::string& value);

/// Scenario files. Built-in names (name = 1A, ...) preload the published parameters and
/// any other keys override them.
ScenarioSpec scenario_from_config(const KeyValueFile& kv);
KeyValueFile scenario_to_config(const ScenarioSpec& spec);
std::string scenario_to_string(const ScenarioSpec& spec);

}  // namespace rar
