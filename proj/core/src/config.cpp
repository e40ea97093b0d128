#include "rar/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

namespace rar {
namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in) {
  KeyValueFile kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section headers are decorative
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw Error("config line " + std::to_string(lineno) + ": empty key");
    kv.entries_.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  return parse(in);
}

void KeyValueFile::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == key) {
      it->second = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

bool KeyValueFile::has(const std::string& key) const {
  return get(key).has_value();
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  std::optional<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out = v;  // last one wins
  }
  return out;
}

std::vector<std::string> KeyValueFile::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

std::string KeyValueFile::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw Error("config: missing required key '" + key + "'");
  return *v;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v) : fallback;
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  return v ? parse_int(*v) : fallback;
}

std::vector<std::string> split_list(const std::string& value, char delim) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, delim)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& value) {
  const std::string s = trim(value);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw Error("not a number: '" + value + "'");
  return v;
}

long long parse_int(const std::string& value) {
  const std::string s = trim(value);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw Error("not an integer: '" + value + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(item));
  return out;
}

ScenarioSpec scenario_from_config(const KeyValueFile& kv) {
  const std::string name = kv.get("name").value_or("custom");
  const Index n = static_cast<Index>(kv.get_int("n", 100));
  ScenarioSpec spec;
  const auto builtins = builtin_scenario_names();
  if (std::find(builtins.begin(), builtins.end(), name) != builtins.end()) {
    spec = builtin_scenario(name, n);
  } else {
    spec.name = name;
    spec.n = n;
    if (!kv.has("block")) throw Error("scenario: custom scenario needs 'block'");
  }

  if (auto block = kv.get("block")) {
    if (*block == "equicorrelated") {
      spec.block = EquicorrelatedBlock{static_cast<Index>(kv.get_int("block_size", 0)), parse_double(kv.require("r"))};
    } else if (*block == "explicit") {
      const auto rows = kv.get_all("block_row");
      if (rows.empty()) throw Error("scenario: explicit block needs block_row entries");
      const Index m = static_cast<Index>(rows.size());
      Matrix mat(m, m);
      for (Index i = 0; i < m; ++i) {
        const auto vals = parse_doubles(rows[static_cast<std::size_t>(i)]);
        if (static_cast<Index>(vals.size()) != m) throw Error("scenario: block_row has wrong length");
        for (Index j = 0; j < m; ++j) mat(i, j) = vals[static_cast<std::size_t>(j)];
      }
      spec.block = ExplicitBlock{mat};
    } else {
      throw Error("scenario: block must be 'equicorrelated' or 'explicit'");
    }
  }
  if (auto v = kv.get("sigma")) spec.sigma = parse_double(*v);
  if (auto v = kv.get("beta_s")) {
    const auto b = parse_doubles(*v);
    spec.beta_s = Eigen::Map<const Vector>(b.data(), static_cast<Index>(b.size()));
  }
  if (auto v = kv.get("p")) {
    if (*v == "rule") {
      spec.p.reset();
    } else {
      spec.p = static_cast<Index>(parse_int(*v));
    }
  }
  build_covariance(spec);  // validates
  return spec;
}

KeyValueFile scenario_to_config(const ScenarioSpec& spec) {
  KeyValueFile kv;
  kv.set("name", spec.name);
  kv.set("n", std::to_string(spec.n));
  kv.set("p", spec.p ? std::to_string(*spec.p) : std::string("rule"));
  kv.set("sigma", fmt(spec.sigma));
  std::string beta;
  for (Index j = 0; j < spec.beta_s.size(); ++j) beta += (j ? ", " : "") + fmt(spec.beta_s[j]);
  kv.set("beta_s", beta);
  if (const auto* eq = std::get_if<EquicorrelatedBlock>(&spec.block)) {
    kv.set("block", "equicorrelated");
    kv.set("block_size", std::to_string(eq->size));
    kv.set("r", fmt(eq->r));
  } else {
    kv.set("block", "explicit");
    const Matrix m = spec.block_matrix();
    for (Index i = 0; i < m.rows(); ++i) {
      std::string row;
      for (Index j = 0; j < m.cols(); ++j) row += (j ? ", " : "") + fmt(m(i, j));
      kv.add("block_row", row);
    }
  }
  return kv;
}

std::string scenario_to_string(const ScenarioSpec& spec) {
  std::ostringstream out;
  const KeyValueFile kv = scenario_to_config(spec);
  for (const auto& [k, v] : kv.entries()) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace rar
