#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "rar/harness.hpp"

namespace rar {
namespace {

using nlohmann::json;

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void check_nonempty(const SignRecoveryTable& t) {
  if (t.methods.empty()) throw Error("emit_table: table has no methods");
  if (t.columns.empty()) throw Error("emit_table: table has no columns");
  if (t.cells.size() != t.methods.size()) throw Error("emit_table: malformed table");
}

json table_json(const SignRecoveryTable& t) {
  json j;
  j["scenario"] = t.scenario;
  j["methods"] = t.methods;
  j["columns"] = json::array();
  for (const auto& [n, p] : t.columns) j["columns"].push_back({{"n", n}, {"p", p}});
  j["cells"] = json::array();
  for (const auto& row : t.cells) {
    json r = json::array();
    for (const auto& c : row) {
      r.push_back({{"successes", c.successes},
                   {"reps", c.reps},
                   {"failures", c.failures},
                   {"proportion", c.proportion()},
                   {"se", c.standard_error()}});
    }
    j["cells"].push_back(std::move(r));
  }
  return j;
}

}  // namespace

TableFormat parse_table_format(const std::string& name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "json") return TableFormat::Json;
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  throw Error("unknown table format '" + name + "'");
}

void emit_table(const SignRecoveryTable& t, TableFormat format, std::ostream& out) {
  check_nonempty(t);
  switch (format) {
    case TableFormat::Csv:
      out << "scenario,method,n,p,proportion,se,successes,reps,failures\n";
      for (std::size_t m = 0; m < t.methods.size(); ++m) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
          const TableCell& cell = t.cells[m][c];
          out << t.scenario << ',' << t.methods[m] << ',' << t.columns[c].first << ',' << t.columns[c].second << ','
              << fixed3(cell.proportion()) << ',' << fixed3(cell.standard_error()) << ',' << cell.successes << ','
              << cell.reps << ',' << cell.failures << '\n';
        }
      }
      break;
    case TableFormat::Json:
      out << table_json(t).dump(2) << '\n';
      break;
    case TableFormat::Markdown:
      out << "Scenario " << t.scenario << "\n\n| (n, p) |";
      for (const auto& [n, p] : t.columns) out << " (" << n << ", " << p << ") |";
      out << "\n|---|";
      for (std::size_t c = 0; c < t.columns.size(); ++c) out << "---|";
      out << '\n';
      for (std::size_t m = 0; m < t.methods.size(); ++m) {
        out << "| " << t.methods[m] << " |";
        for (const auto& cell : t.cells[m]) out << ' ' << fixed3(cell.proportion()) << " |";
        out << '\n';
      }
      break;
  }
}

void emit_table(const SignRecoveryTable& table, TableFormat format, const std::string& path) {
  check_nonempty(table);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  emit_table(table, format, out);
  if (!out) throw Error("write failed for " + path);
}

SignRecoveryTable table_from_json(const std::string& text) {
  SignRecoveryTable t;
  try {
    const json j = json::parse(text);
    t.scenario = j.at("scenario").get<std::string>();
    t.methods = j.at("methods").get<std::vector<std::string>>();
    for (const auto& c : j.at("columns")) t.columns.emplace_back(c.at("n").get<Index>(), c.at("p").get<Index>());
    for (const auto& row : j.at("cells")) {
      std::vector<TableCell> r;
      for (const auto& c : row) {
        TableCell cell;
        cell.successes = c.at("successes").get<Index>();
        cell.reps = c.at("reps").get<Index>();
        cell.failures = c.at("failures").get<Index>();
        r.push_back(cell);
      }
      t.cells.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("table json: ") + e.what());
  }
  return t;
}

std::string record_to_json(const ReplicationRecord& r) {
  json j;
  j["event"] = "replication";
  j["scenario"] = r.scenario;
  j["n"] = r.n;
  j["p"] = r.p;
  j["replication"] = r.replication;
  j["seed"] = r.seed;
  j["dataset_hash"] = hex64(r.dataset_hash);
  json methods = json::array();
  for (const auto& m : r.methods) {
    json e;
    e["method"] = m.label;
    if (m.success) {
      e["success"] = *m.success;
    } else {
      e["success"] = nullptr;
      e["error"] = m.error;
    }
    e["converged"] = m.converged;
    e["max_kkt"] = m.max_kkt;
    if (m.checked_kkt) {
      e["checked_kkt"] = *m.checked_kkt;
      e["kkt_failures"] = m.kkt_failures;
    }
    e["solutions"] = m.solutions;
    if (m.retained) e["retained"] = *m.retained;
    e["seconds"] = m.seconds;
    methods.push_back(std::move(e));
  }
  j["methods"] = std::move(methods);
  return j.dump();
}

void write_events(const ExperimentResult& result, std::ostream& out) {
  for (const auto& r : result.records) out << record_to_json(r) << '\n';
  for (const auto& w : result.warnings) out << json{{"event", "warning"}, {"message", w}}.dump() << '\n';
  for (const auto& t : result.tables) {
    json j = table_json(t);
    j["event"] = "table";
    out << j.dump() << '\n';
  }
}

}  // namespace rar
