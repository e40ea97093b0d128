#include "rar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "rar/rng.hpp"

namespace rar {
namespace {

bool is_builtin(const std::string& name) {
  const auto names = builtin_scenario_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ScenarioSpec load_scenario(const std::string& ref) {
  if (is_builtin(ref)) return builtin_scenario(ref, 100);
  return scenario_from_config(KeyValueFile::load(ref));
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error("expected a boolean, got '" + v + "'");
}

std::vector<MethodSpec> all_methods() {
  std::vector<MethodSpec> out = {{Method::Lasso, 0}, {Method::SisLasso, 0}, {Method::IsisLasso, 0},
                                 {Method::AdaLasso, 0}};
  for (Method m : {Method::Rar, Method::Mrar}) {
    for (int k : {1, 5, 10, 15, 30}) out.push_back({m, k});
  }
  return out;
}

// Oracle success counting only converged solutions; a flagged iterate never scores.
bool converged_recovery(const EstimatorOutput& out, const SignPattern& truth) {
  auto scan = [&](const SolutionPath& path) {
    for (std::size_t k = 0; k < path.betas.size(); ++k) {
      if (path.converged[k] && sign_of(path.betas[k]) == truth) return true;
    }
    return false;
  };
  if (scan(out.primary_path)) return true;
  return std::any_of(out.stage3.begin(), out.stage3.end(), [&](const Stage3Fit& s) { return scan(s.path); });
}

void summarize_paths(const EstimatorOutput& out, const Dataset& working, const ExperimentConfig& cfg,
                     MethodRecord& rec) {
  auto visit = [&](const SolutionPath& path, const PenaltyProfile& profile) {
    rec.converged = rec.converged && path.all_converged();
    rec.max_kkt = std::max(rec.max_kkt, path.max_kkt_violation());
    rec.solutions += path.size();
    if (!cfg.verify_kkt) return;
    double worst = rec.checked_kkt.value_or(0.0);
    for (const KktReport& r : kkt_check_path(working, profile, path, cfg.kkt_tol)) {
      worst = std::max(worst, r.max_violation);
      if (!r.passed) ++rec.kkt_failures;
    }
    rec.checked_kkt = worst;
  };
  visit(out.primary_path, out.primary_profile);
  for (const auto& s : out.stage3) visit(s.path, s.profile);
}

}  // namespace

std::string MethodSpec::label() const {
  switch (method) {
    case Method::Lasso:
      return "Lasso";
    case Method::SisLasso:
      return "SIS-lasso";
    case Method::IsisLasso:
      return "ISIS-lasso";
    case Method::AdaLasso:
      return "Ada-lasso";
    case Method::Rar:
      return "RAR_" + std::to_string(permutations);
    case Method::Mrar:
      return "MRAR_" + std::to_string(permutations);
  }
  return "unknown";
}

std::string MethodSpec::key() const {
  std::string k = method_name(method);
  if (method == Method::Rar || method == Method::Mrar) k += ":" + std::to_string(permutations);
  return k;
}

MethodSpec parse_method_spec(const std::string& text) {
  MethodSpec spec;
  const auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  spec.method = parse_method(name);
  const bool retention = spec.method == Method::Rar || spec.method == Method::Mrar;
  if (colon != std::string::npos) {
    if (!retention) throw Error("method '" + name + "' takes no permutation count");
    spec.permutations = static_cast<int>(parse_int(text.substr(colon + 1)));
    if (spec.permutations < 1) throw Error("permutation count must be >= 1");
  } else if (retention) {
    spec.permutations = 10;
  }
  return spec;
}

void ExperimentConfig::validate() const {
  if (scenarios.empty()) throw Error("experiment: no scenarios");
  if (ns.empty()) throw Error("experiment: no sample sizes");
  if (methods.empty()) throw Error("experiment: no methods");
  if (replications < 1) throw Error("experiment: replications must be >= 1");
  if (parallelism < 1) throw Error("experiment: parallelism must be >= 1");
  for (Index n : ns) {
    if (n < 3) throw Error("experiment: n must be >= 3");
  }
  estimator.solver.validate();
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueFile& kv) {
  ExperimentConfig cfg;
  for (const auto& v : kv.get_all("scenario")) {
    for (const auto& name : split_list(v)) cfg.scenarios.push_back(load_scenario(name));
  }
  if (auto v = kv.get("n")) {
    for (const auto& t : split_list(*v)) cfg.ns.push_back(static_cast<Index>(parse_int(t)));
  }
  if (auto v = kv.get("methods")) {
    for (const auto& t : split_list(*v)) cfg.methods.push_back(parse_method_spec(t));
  }
  cfg.replications = static_cast<int>(kv.get_int("replications", cfg.replications));
  cfg.root_seed = static_cast<std::uint64_t>(kv.get_int("root_seed", static_cast<long long>(cfg.root_seed)));
  cfg.parallelism = static_cast<int>(kv.get_int("parallelism", cfg.parallelism));
  if (auto v = kv.get("out")) cfg.out_dir = *v;
  if (auto v = kv.get("verify_kkt")) cfg.verify_kkt = parse_bool(*v);
  cfg.kkt_tol = kv.get_double("kkt_tol", cfg.kkt_tol);

  EstimatorConfig& e = cfg.estimator;
  e.solver.n_lambda = static_cast<int>(kv.get_int("n_lambda", e.solver.n_lambda));
  e.solver.lambda_min_ratio = kv.get_double("lambda_min_ratio", e.solver.lambda_min_ratio);
  e.solver.tol = kv.get_double("tol", e.solver.tol);
  e.solver.max_iters = static_cast<int>(kv.get_int("max_iters", e.solver.max_iters));
  if (auto v = kv.get("early_stop")) e.solver.early_stop = parse_bool(*v);
  if (auto v = kv.get("standardize")) e.standardize = parse_bool(*v);
  if (auto v = kv.get("cap")) e.cap = parse_bool(*v);
  e.screen_size = static_cast<Index>(kv.get_int("screen_size", e.screen_size));
  e.isis.iterations = static_cast<int>(kv.get_int("isis_iterations", e.isis.iterations));
  e.isis.per_iter = static_cast<Index>(kv.get_int("isis_per_iter", e.isis.per_iter));
  e.gic_multiplier = kv.get_double("gic_multiplier", e.gic_multiplier);
  if (auto v = kv.get("stage3")) {
    if (*v == "enumerate") {
      e.stage3 = Stage3Mode::Enumerate;
    } else if (*v == "gic") {
      e.stage3 = Stage3Mode::Gic;
    } else {
      throw Error("stage3 must be 'enumerate' or 'gic'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::full_grid() {
  ExperimentConfig cfg;
  for (const auto& name : builtin_scenario_names()) cfg.scenarios.push_back(builtin_scenario(name, 100));
  cfg.ns = {100, 200, 300, 400, 500};
  cfg.methods = all_methods();
  cfg.replications = 200;
  return cfg;
}

ExperimentConfig ExperimentConfig::smoke() {
  ExperimentConfig cfg = full_grid();
  cfg.ns = {300, 500};
  cfg.replications = 25;
  return cfg;
}

int resolve_parallelism(int requested) {
  if (const char* env = std::getenv("RAR_WORKERS")) {
    try {
      const long long v = parse_int(env);
      if (v > 0) return static_cast<int>(v);
    } catch (const Error&) {
    }
  }
  return std::max(1, requested);
}

double TableCell::proportion() const {
  return reps > 0 ? static_cast<double>(successes) / static_cast<double>(reps) : 0.0;
}

double TableCell::standard_error() const {
  if (reps == 0) return 0.0;
  const double q = proportion();
  return std::sqrt(q * (1.0 - q) / static_cast<double>(reps));
}

const TableCell& SignRecoveryTable::cell(const std::string& method, Index n) const {
  auto mi = std::find(methods.begin(), methods.end(), method);
  if (mi == methods.end()) throw Error("table has no method '" + method + "'");
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].first == n) return cells[static_cast<std::size_t>(mi - methods.begin())][c];
  }
  throw Error("table has no column n=" + std::to_string(n));
}

std::uint64_t replication_seed(std::uint64_t root, const std::string& scenario, Index n, int replication) {
  return derive_seed(root, {hash_tag(scenario), static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replication)});
}

std::uint64_t dataset_hash(const Dataset& data) {
  std::uint64_t h = hash_bytes(data.x.data(), static_cast<std::size_t>(data.x.size()) * sizeof(double));
  return hash_bytes(data.y.data(), static_cast<std::size_t>(data.y.size()) * sizeof(double), h);
}

ReplicationRecord run_replication(const ExperimentConfig& cfg, const ScenarioSpec& scenario, int replication) {
  ReplicationRecord rec;
  rec.scenario = scenario.name;
  rec.n = scenario.n;
  rec.p = scenario.dimension();
  rec.replication = replication;
  rec.seed = replication_seed(cfg.root_seed, scenario.name, scenario.n, replication);

  const Dataset data = sample_dataset(scenario, rec.seed);
  rec.dataset_hash = dataset_hash(data);
  const Dataset working = working_data(data, cfg.estimator);
  const SignPattern truth = sign_of(*data.truth);

  // RAR_m and MRAR_m share retention (same permutation seed), so stage 2 is computed once.
  std::map<int, EstimatorOutput> rar_by_m;
  for (const MethodSpec& spec : cfg.methods) {
    MethodRecord mr;
    mr.label = spec.label();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      EstimatorConfig ec = cfg.estimator;
      EstimatorOutput out;
      if (spec.method == Method::Rar || spec.method == Method::Mrar) {
        ec.permutations = spec.permutations;
        ec.seed = derive_seed(rec.seed, {hash_tag("retention"), static_cast<std::uint64_t>(spec.permutations)});
        auto it = rar_by_m.find(spec.permutations);
        if (it == rar_by_m.end()) {
          it = rar_by_m.emplace(spec.permutations, run_method_on_working(Method::Rar, working, ec)).first;
        }
        out = spec.method == Method::Rar ? it->second : mrar_from_rar_on_working(working, it->second, ec);
        mr.retained = out.retention->retained;
      } else {
        ec.seed = derive_seed(rec.seed, {hash_tag(method_name(spec.method))});
        out = run_method_on_working(spec.method, working, ec);
      }
      mr.success = converged_recovery(out, truth);
      summarize_paths(out, working, cfg, mr);
    } catch (const std::exception& e) {
      mr.success.reset();
      mr.error = e.what();
    }
    mr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.methods.push_back(std::move(mr));
  }
  return rec;
}

SignRecoveryTable aggregate(const std::string& scenario, const std::vector<MethodSpec>& methods,
                            const std::vector<ReplicationRecord>& records) {
  SignRecoveryTable t;
  t.scenario = scenario;
  for (const auto& m : methods) t.methods.push_back(m.label());
  for (const auto& r : records) {
    if (r.scenario != scenario) continue;
    const std::pair<Index, Index> col{r.n, r.p};
    if (std::find(t.columns.begin(), t.columns.end(), col) == t.columns.end()) t.columns.push_back(col);
  }
  std::sort(t.columns.begin(), t.columns.end());
  t.cells.assign(t.methods.size(), std::vector<TableCell>(t.columns.size()));
  for (const auto& r : records) {
    if (r.scenario != scenario) continue;
    const auto c = static_cast<std::size_t>(
        std::find(t.columns.begin(), t.columns.end(), std::pair<Index, Index>{r.n, r.p}) - t.columns.begin());
    for (std::size_t m = 0; m < t.methods.size() && m < r.methods.size(); ++m) {
      TableCell& cell = t.cells[m][c];
      const auto& mr = r.methods[m];
      if (!mr.success) {
        ++cell.failures;
        continue;
      }
      ++cell.reps;
      if (*mr.success) ++cell.successes;
    }
  }
  return t;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, {});
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(const ReplicationRecord&)>& on_done) {
  config.validate();
  struct Item {
    std::size_t scenario;
    Index n;
    int rep;
  };
  std::vector<Item> items;
  std::vector<Index> ns = config.ns;
  std::sort(ns.begin(), ns.end());
  for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
    for (Index n : ns) {
      for (int r = 0; r < config.replications; ++r) items.push_back({s, n, r});
    }
  }
  std::vector<ReplicationRecord> records(items.size());
  std::atomic<std::size_t> next{0};
  std::mutex lock;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      const Item& it = items[i];
      const ScenarioSpec spec = config.scenarios[it.scenario].with_n(it.n);
      records[i] = run_replication(config, spec, it.rep);
      if (on_done) {
        std::lock_guard<std::mutex> g(lock);
        on_done(records[i]);
      }
    }
  };
  const int workers = std::min<int>(resolve_parallelism(config.parallelism), static_cast<int>(items.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult res;
  for (const auto& spec : config.scenarios) res.tables.push_back(aggregate(spec.name, config.methods, records));
  for (const auto& r : records) {
    for (const auto& m : r.methods) {
      if (!m.success) {
        std::ostringstream w;
        w << "scenario " << r.scenario << " n=" << r.n << " replication " << r.replication << ": " << m.label
          << " failed and is excluded: " << m.error;
        res.warnings.push_back(w.str());
      }
    }
  }
  res.records = std::move(records);
  return res;
}

}  // namespace rar
