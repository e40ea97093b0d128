#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rar/config.hpp"
#include "rar/csv.hpp"
#include "rar/estimators.hpp"
#include "rar/gaussian_sim.hpp"
#include "rar/harness.hpp"
#include "rar/marginal_screen.hpp"
#include "rar/rng.hpp"
#include "rar/tuning.hpp"
#include "rar/wlasso.hpp"

using namespace rar;
using nlohmann::json;

namespace {

// Where a command gets its data: a CSV file or a simulated scenario.
struct DataSource {
  std::string csv;
  std::string response;
  std::string scenario;
  Index n = 100;
  Index p = 0;
  std::uint64_t data_seed = 1;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--data", csv, "CSV file (numeric, header row)");
    cmd->add_option("--response", response, "response column name or 0-based index (default: first column)");
    cmd->add_option("--scenario", scenario, "simulate a built-in scenario (1A, 1B, 2C, 2D) or a scenario file");
    cmd->add_option("--n", n, "sample size for --scenario")->check(CLI::Range(3, 10000000));
    cmd->add_option("--p", p, "dimension for --scenario (default: dimension rule)");
    cmd->add_option("--data-seed", data_seed, "seed for --scenario sampling");
  }

  ScenarioSpec spec() const {
    const auto names = builtin_scenario_names();
    ScenarioSpec s = std::find(names.begin(), names.end(), scenario) != names.end()
                         ? builtin_scenario(scenario, n)
                         : scenario_from_config(KeyValueFile::load(scenario)).with_n(n);
    if (p > 0) s.p = p;
    return s;
  }

  Dataset load() const {
    if (!csv.empty() && !scenario.empty()) throw Error("give either --data or --scenario, not both");
    if (!csv.empty()) {
      CsvOptions opt;
      opt.response = response;
      return read_csv(csv, opt);
    }
    if (scenario.empty()) throw Error("no data: give --data file.csv or --scenario name");
    return sample_dataset(spec(), data_seed);
  }
};

struct EstimatorFlags {
  std::string method = "lasso";
  int permutations = 10;
  Index dn = 0;
  std::uint64_t seed = 1;
  bool raw = false;
  std::string stage3 = "enumerate";
  int n_lambda = 100;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--method", method, "lasso, ada, sis, isis, rar, mrar")
        ->check(CLI::IsMember({"lasso", "ada", "sis", "isis", "rar", "mrar"}));
    cmd->add_option("--permutations", permutations, "permutations m for the retention threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dn", dn, "SIS/ISIS screen size (default floor(n / log n))");
    cmd->add_option("--seed", seed, "permutation seed");
    cmd->add_flag("--raw", raw, "fit on the raw columns instead of standardized ones");
    cmd->add_option("--stage3", stage3, "MRAR stage 3: enumerate or gic")->check(CLI::IsMember({"enumerate", "gic"}));
    cmd->add_option("--n-lambda", n_lambda, "grid size")->check(CLI::PositiveNumber);
  }

  EstimatorConfig config() const {
    EstimatorConfig ec;
    ec.permutations = permutations;
    ec.screen_size = dn;
    ec.seed = seed;
    ec.standardize = !raw;
    ec.stage3 = stage3 == "gic" ? Stage3Mode::Gic : Stage3Mode::Enumerate;
    ec.solver.n_lambda = n_lambda;
    return ec;
  }
};

std::string events_path;

void log_event(const json& event) {
  if (events_path.empty()) return;
  std::ofstream out(events_path, std::ios::app);
  if (!out) throw Error("cannot append to " + events_path);
  out << event.dump() << '\n';
}

json sparse_json(const CoefficientVector& b, const std::vector<std::string>& names) {
  json out = json::array();
  for (Index j : b.support()) {
    json e = {{"index", j}, {"value", b[j]}};
    if (!names.empty()) e["name"] = names[static_cast<std::size_t>(j)];
    out.push_back(std::move(e));
  }
  return out;
}

// Penalty file: one "feature,value" line per feature; value 0 = unpenalized, inf = excluded,
// otherwise a positive weight. Features are column names or 0-based indices; others get weight 1.
PenaltyProfile read_penalty_file(const std::string& path, const Dataset& data) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open penalty file " + path);
  PenaltyProfile prof = PenaltyProfile::uniform(data.p());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto parts = split_list(line);
    if (parts.size() != 2) throw Error("penalty file line " + std::to_string(lineno) + ": expected feature,value");
    Index j = -1;
    auto it = std::find(data.column_names.begin(), data.column_names.end(), parts[0]);
    if (it != data.column_names.end()) {
      j = static_cast<Index>(it - data.column_names.begin());
    } else {
      j = static_cast<Index>(parse_int(parts[0]));
    }
    if (j < 0 || j >= data.p()) throw Error("penalty file line " + std::to_string(lineno) + ": unknown feature " + parts[0]);
    const std::string& v = parts[1];
    if (v == "inf" || v == "Inf" || v == "INF") {
      prof.set_excluded(j);
    } else {
      const double w = parse_double(v);
      if (w == 0.0) {
        prof.set_unpenalized(j);
      } else {
        prof.set_weighted(j, w);
      }
    }
  }
  prof.validate();
  return prof;
}

void write_path_csv(std::ostream& out, const std::string& label, const SolutionPath& path, const EstimatorOutput& scaling) {
  for (std::size_t k = 0; k < path.betas.size(); ++k) {
    const auto [b, b0] = to_original_scale(scaling, path.betas[k], path.intercepts[k]);
    const IndexSet s = b.support();
    out << label << ',' << k << ',' << path.lambdas[k] << ',' << s.size() << ",intercept," << b0 << '\n';
    for (Index j : s) out << label << ',' << k << ',' << path.lambdas[k] << ',' << s.size() << ',' << j << ',' << b[j] << '\n';
  }
}

json path_json(const SolutionPath& path, const EstimatorOutput& scaling, const std::vector<std::string>& names) {
  json steps = json::array();
  for (std::size_t k = 0; k < path.betas.size(); ++k) {
    const auto [b, b0] = to_original_scale(scaling, path.betas[k], path.intercepts[k]);
    steps.push_back({{"lambda", path.lambdas[k]},
                     {"nonzero", b.support().size()},
                     {"intercept", b0},
                     {"converged", static_cast<bool>(path.converged[k])},
                     {"coefficients", sparse_json(b, names)}});
  }
  return steps;
}

int cmd_fit(const DataSource& src, const EstimatorFlags& flags, const std::string& emit, const std::string& penalty_file,
            const std::string& out_path) {
  const Dataset data = src.load();
  const EstimatorConfig ec = flags.config();
  EstimatorOutput out;
  if (!penalty_file.empty()) {
    if (flags.method != "lasso") throw Error("--penalty-file applies to --method lasso only");
    const Dataset w = working_data(data, ec);
    out.primary_profile = read_penalty_file(penalty_file, data);
    out.primary_path = fit_path(w, out.primary_profile, ec.solver);
    out.standardized = ec.standardize;
    out.center = w.column_means;
    out.scale = w.column_scales;
  } else {
    out = run_method(parse_method(flags.method), data, ec);
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw Error("cannot write " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  if (emit == "csv") {
    os << "path,step,lambda,nonzero,feature,value\n";
    write_path_csv(os, "primary", out.primary_path, out);
    for (std::size_t i = 0; i < out.stage3.size(); ++i) write_path_csv(os, "stage3_" + std::to_string(i), out.stage3[i].path, out);
  } else {
    json j;
    j["method"] = method_name(out.method);
    j["n"] = data.n();
    j["p"] = data.p();
    j["standardized"] = out.standardized;
    if (out.retention) {
      j["gamma"] = out.retention->gamma;
      j["retained"] = out.retention->retained;
      j["capped"] = out.retention->capped;
    }
    if (out.screened) j["screened"] = *out.screened;
    j["degraded"] = out.degraded;
    j["path"] = path_json(out.primary_path, out, data.column_names);
    json s3 = json::array();
    for (const auto& s : out.stage3) {
      s3.push_back({{"q", s.q}, {"stage2_steps", s.stage2_indices}, {"path", path_json(s.path, out, data.column_names)}});
    }
    j["stage3"] = std::move(s3);
    json times = json::object();
    for (const auto& t : out.timings) times[t.stage] = t.seconds;
    j["timings"] = std::move(times);
    os << j.dump(2) << '\n';
  }
  log_event({{"event", "fit"}, {"method", method_name(out.method)}, {"n", data.n()}, {"p", data.p()},
             {"steps", out.primary_path.size()}, {"stage3_paths", out.stage3.size()}});
  return 0;
}

int cmd_screen(const DataSource& src, int permutations, std::uint64_t seed, bool cap, bool standardize_cols, Index top) {
  Dataset data = src.load();
  if (standardize_cols) data = standardize(data);
  const MarginalStats st = marginal_coefficients(data);
  const double gamma = permutation_threshold(data, permutations, seed);
  const RetentionResult r = retain(st, gamma, data.n(), cap);
  std::printf("%6s  %-16s %12s %12s\n", "rank", "feature", "coef", "|coef|");
  const Index k = std::min<Index>(top, data.p());
  for (Index i = 0; i < k; ++i) {
    const Index j = st.abs_rank[static_cast<std::size_t>(i)];
    const std::string name = data.column_names.empty() ? std::to_string(j) : data.column_names[static_cast<std::size_t>(j)];
    std::printf("%6lld  %-16s %12.6f %12.6f%s\n", static_cast<long long>(i + 1), name.c_str(), st.coef[j], std::abs(st.coef[j]),
                std::binary_search(r.retained.begin(), r.retained.end(), j) ? "  retained" : "");
  }
  std::printf("\npermutation threshold (m = %d): %.6f\n", permutations, gamma);
  std::printf("retained %zu feature(s)%s\n", r.retained.size(), r.capped ? ", capped at ceil(sqrt(n))" : "");
  log_event({{"event", "screen"}, {"gamma", gamma}, {"retained", r.retained}, {"capped", r.capped}});
  return 0;
}

int cmd_evaluate(const DataSource& src, const EstimatorFlags& flags, const std::string& metric, const std::string& test_csv,
                 int folds) {
  const Dataset data = src.load();
  std::optional<Dataset> test;
  if (!test_csv.empty()) {
    CsvOptions opt;
    opt.response = src.response;
    test = read_csv(test_csv, opt);
  }
  const EstimatorConfig ec = flags.config();
  const Method method = parse_method(flags.method);
  EvalResult res;
  json j;
  j["metric"] = metric;
  j["method"] = method_name(method);

  if (metric == "oracle") {
    if (!data.truth) throw Error("--metric oracle needs simulated data with known coefficients (--scenario)");
    const EstimatorOutput out = run_method(method, data, ec);
    res.oracle_sign_success = oracle_sign_success(out, sign_of(*data.truth));
  } else if (metric == "gic") {
    const EstimatorOutput out = run_method(method, data, ec);
    const Dataset w = working_data(data, ec);
    const SolutionPath& path = out.stage3.empty() ? out.primary_path : out.stage3.front().path;
    if (out.stage3.size() > 1) throw Error("--metric gic with mrar needs --stage3 gic");
    const GicChoice g = gic_select(w, path, ec.gic_multiplier);
    const auto [b, b0] = to_original_scale(out, path.betas[static_cast<std::size_t>(g.index)], path.intercepts[static_cast<std::size_t>(g.index)]);
    res.selected_lambda = g.lambda;
    res.selected_beta = b;
    res.intercept = b0;
    res.model_size = static_cast<Index>(b.support().size());
    if (test) res.test_mse = prediction_mse(b, b0, *test);
  } else {
    if (metric == "mse" && !test) throw Error("--metric mse needs --test file.csv");
    RealDataOptions opt;
    opt.folds = folds;
    opt.estimator = ec;
    MethodSpec spec{method, flags.permutations};
    res = evaluate_prediction(spec, data, test ? *test : data, opt, flags.seed);
    if (!test) res.test_mse.reset();
  }

  if (res.oracle_sign_success) {
    j["oracle_sign_success"] = *res.oracle_sign_success;
  } else {
    j["oracle_sign_success"] = nullptr;
  }
  if (metric != "oracle") {
    j["selected_lambda"] = res.selected_lambda;
    j["intercept"] = res.intercept;
    j["model_size"] = res.model_size;
    j["coefficients"] = sparse_json(res.selected_beta, data.column_names);
  }
  j["test_mse"] = res.test_mse ? json(*res.test_mse) : json(nullptr);
  std::cout << j.dump(2) << '\n';
  j["event"] = "evaluate";
  log_event(j);
  return 0;
}

int cmd_diagnose(const DataSource& src, const std::string& retained_list, double threshold, double margin, bool as_json) {
  if (src.scenario.empty()) throw Error("diagnose needs --scenario");
  const ScenarioSpec s = src.spec();
  std::optional<IndexSet> retained;
  if (!retained_list.empty()) {
    std::vector<Index> r;
    for (const auto& t : split_list(retained_list)) r.push_back(static_cast<Index>(parse_int(t)));
    retained = make_index_set(std::move(r));
  }
  const PopulationDiagnostics d = population_diagnostics(s, retained);
  const Index m = s.block_size();
  json j;
  j["scenario"] = s.name;
  j["n"] = s.n;
  j["p"] = s.dimension();
  j["support"] = d.support;
  j["marginal_corr_block"] = std::vector<double>(d.marginal_corr.data(), d.marginal_corr.data() + m);
  j["var_y"] = d.var_y;
  j["irrep_norm"] = d.irrep_norm;
  if (d.restricted_irrep_norm) j["restricted_irrep_norm"] = *d.restricted_irrep_norm;
  j["zeta"] = d.zeta;
  j["min_eig_ss"] = d.min_eig_ss;
  j["conditional_rho"] = d.conditional_rho;
  j["sigma_beta_inf"] = d.sigma_beta_inf;
  j["min_abs_beta"] = d.min_abs_beta;
  std::optional<FalseRetentionDiagnostics> fr;
  if (threshold > 0.0) {
    fr = false_retention_diagnostics(s, threshold, margin);
    j["strong_signals"] = fr->sets.strong_signals;
    j["strong_noises"] = fr->sets.strong_noises;
    j["min_eig_signal_noise"] = fr->min_eig_signal_noise;
    j["restricted_irrep_max"] = fr->restricted_irrep_max;
    j["noise_irrep_norm"] = fr->noise_irrep_norm;
  }
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("scenario %s  n = %lld  p = %lld  sigma = %g\n", s.name.c_str(), static_cast<long long>(s.n),
                static_cast<long long>(s.dimension()), s.sigma);
    std::printf("\n%8s %10s %12s %12s\n", "feature", "beta", "beta^M", "corr(X, Y)");
    const Vector beta = s.beta();
    for (Index i = 0; i < m; ++i) {
      std::printf("%8lld %10.4f %12.4f %12.4f\n", static_cast<long long>(i), beta[i], d.marginal_coef[i], d.marginal_corr[i]);
    }
    std::printf("%8s %10s %12s %12s\n", "rest", "0", "0", "0");
    std::printf("\nvar(Y)                    %.6f\n", d.var_y);
    std::printf("irrepresentable norm      %.6f%s\n", d.irrep_norm, d.irrep_norm < 1.0 ? "" : "  (condition fails)");
    if (d.restricted_irrep_norm) std::printf("restricted irrep. norm    %.6f\n", *d.restricted_irrep_norm);
    std::printf("zeta                      %.6f\n", d.zeta);
    std::printf("min eigenvalue Sigma_SS   %.6f\n", d.min_eig_ss);
    std::printf("max conditional variance  %.6f\n", d.conditional_rho);
    std::printf("||Sigma beta||_inf        %.6f\n", d.sigma_beta_inf);
    std::printf("min |beta_S|              %.6f\n", d.min_abs_beta);
    if (fr) {
      auto list = [](const IndexSet& s) {
        std::string out;
        for (Index i : s) out += (out.empty() ? "" : " ") + std::to_string(i);
        return out.empty() ? std::string("(none)") : out;
      };
      std::printf("\nthreshold %.4f, margin %.4f\n", threshold, margin);
      std::printf("strong signals            %s\n", list(fr->sets.strong_signals).c_str());
      std::printf("strong noises             %s\n", list(fr->sets.strong_noises).c_str());
      std::printf("min eigenvalue S u Z      %.6f\n", fr->min_eig_signal_noise);
      std::printf("max restricted irrep.     %.6f over %zu sets\n", fr->restricted_irrep_max, fr->subsets_checked);
      std::printf("noise irrep. norm         %.6f\n", fr->noise_irrep_norm);
    }
  }
  j["event"] = "diagnose";
  log_event(j);
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir_flag, bool smoke, int parallelism, int reps,
                 bool quiet) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = ExperimentConfig::from_config(KeyValueFile::load(config_path));
  } else {
    cfg = smoke ? ExperimentConfig::smoke() : ExperimentConfig::full_grid();
  }
  if (smoke && !config_path.empty()) cfg.replications = ExperimentConfig::smoke().replications;
  if (parallelism > 0) cfg.parallelism = parallelism;
  if (reps > 0) cfg.replications = reps;
  const std::string out_dir = !out_dir_flag.empty() ? out_dir_flag : (!cfg.out_dir.empty() ? cfg.out_dir : "results");
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  const std::size_t total = cfg.scenarios.size() * cfg.ns.size() * static_cast<std::size_t>(cfg.replications);
  std::size_t done = 0;
  const ExperimentResult res = run_experiment(cfg, [&](const ReplicationRecord& r) {
    ++done;
    if (!quiet) std::fprintf(stderr, "\r[%zu/%zu] %s n=%lld rep %d   ", done, total, r.scenario.c_str(), static_cast<long long>(r.n), r.replication);
  });
  if (!quiet) std::fprintf(stderr, "\n");

  {
    std::ofstream ev(out_dir + "/events.jsonl");
    if (!ev) throw Error("cannot write " + out_dir + "/events.jsonl");
    write_events(res, ev);
  }
  for (const auto& t : res.tables) {
    const std::string base = out_dir + "/table_" + t.scenario;
    emit_table(t, TableFormat::Csv, base + ".csv");
    emit_table(t, TableFormat::Json, base + ".json");
    emit_table(t, TableFormat::Markdown, base + ".md");
    emit_table(t, TableFormat::Markdown, std::cout);
    std::cout << '\n';
  }
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return 0;
}

int cmd_realdata(const std::string& train_csv, const std::string& test_csv, const std::string& response,
                 const std::string& methods, RealDataOptions opt, bool as_json) {
  CsvOptions co;
  co.response = response;
  const Dataset train = read_csv(train_csv, co);
  const Dataset test = test_csv.empty() ? train : read_csv(test_csv, co);
  if (test_csv.empty() && opt.train_size == 0) throw Error("realdata needs --test or --train-size");
  for (const auto& m : split_list(methods)) opt.methods.push_back(parse_method_spec(m));
  const auto summaries = run_realdata(train, test_csv.empty() ? train.rows({}) : test, opt);
  json j = json::array();
  for (const auto& s : summaries) {
    auto sd = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j.push_back({{"method", s.method},
                 {"mean_mse", s.mean_mse()},
                 {"sd_mse", sd(s.sd_mse())},
                 {"mean_best_path_mse", s.mean_best_mse()},
                 {"sd_best_path_mse", sd(s.sd_best_mse())},
                 {"mean_model_size", s.mean_size()},
                 {"sd_model_size", sd(s.sd_size())},
                 {"repetitions", s.test_mse.size()}});
  }
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("%-12s %12s %10s %12s %10s %10s\n", "method", "test MSE", "sd", "best MSE", "sd", "size");
    for (const auto& e : j) {
      auto num = [](const json& v) { return v.is_null() ? std::string("-") : std::to_string(v.get<double>()); };
      std::printf("%-12s %12.5f %10s %12.5f %10s %10.1f\n", e["method"].get<std::string>().c_str(), e["mean_mse"].get<double>(),
                  num(e["sd_mse"]).c_str(), e["mean_best_path_mse"].get<double>(), num(e["sd_best_path_mse"]).c_str(),
                  e["mean_model_size"].get<double>());
    }
  }
  log_event({{"event", "realdata"}, {"summaries", j}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularization after retention: variable selection for ultrahigh-dimensional regression"};
  app.require_subcommand(1);
  app.add_option("--events", events_path, "append a JSON line per command result to this file");

  auto* simulate = app.add_subcommand("simulate", "run a replication experiment and write sign-recovery tables");
  std::string config_path;
  std::string out_dir;
  bool smoke = false;
  bool quiet = false;
  int parallelism = 0;
  int reps = 0;
  simulate->add_option("--config", config_path, "experiment file (key = value)")->check(CLI::ExistingFile);
  simulate->add_option("--out", out_dir, "output directory (tables and events.jsonl)");
  simulate->add_flag("--smoke", smoke, "25 replications at n = 300, 500");
  simulate->add_option("--parallelism", parallelism, "worker threads (RAR_WORKERS overrides)");
  simulate->add_option("--reps", reps, "override the replication count");
  simulate->add_flag("--quiet", quiet, "no progress output");

  auto* fit = app.add_subcommand("fit", "fit one estimator and export its solution path");
  DataSource fit_src;
  EstimatorFlags fit_flags;
  std::string emit = "json";
  std::string penalty_file;
  std::string fit_out;
  fit_src.add_options(fit);
  fit_flags.add_options(fit);
  fit->add_option("--emit", emit, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  fit->add_option("--penalty-file", penalty_file, "feature,value lines: 0 unpenalized, inf excluded, w weight")
      ->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "write to a file instead of stdout");

  auto* screen = app.add_subcommand("screen", "rank marginal coefficients and compute the retention threshold");
  DataSource screen_src;
  int screen_m = 10;
  std::uint64_t screen_seed = 1;
  bool screen_cap = true;
  bool screen_std = true;
  Index top = 20;
  screen_src.add_options(screen);
  screen->add_option("--permutations", screen_m, "permutations m")->check(CLI::PositiveNumber);
  screen->add_option("--seed", screen_seed, "permutation seed");
  screen->add_option("--cap", screen_cap, "cap retention at ceil(sqrt(n)) (true/false)");
  screen->add_option("--standardize", screen_std, "standardize columns first (true/false)");
  screen->add_option("--top", top, "rows to print");

  auto* evaluate = app.add_subcommand("evaluate", "tune and score one estimator; prints JSON");
  DataSource eval_src;
  EstimatorFlags eval_flags;
  std::string metric = "cv";
  std::string eval_test;
  int eval_folds = 5;
  eval_src.add_options(evaluate);
  eval_flags.add_options(evaluate);
  evaluate->add_option("--metric", metric, "oracle, cv, gic, mse")->check(CLI::IsMember({"oracle", "cv", "gic", "mse"}));
  evaluate->add_option("--test", eval_test, "held-out CSV")->check(CLI::ExistingFile);
  evaluate->add_option("--folds", eval_folds, "cross-validation folds")->check(CLI::Range(2, 1000));

  auto* diagnose = app.add_subcommand("diagnose", "population diagnostics of a scenario");
  DataSource diag_src;
  std::string retained_list;
  double threshold = 0.0;
  double margin = 0.0;
  bool diag_json = false;
  diagnose->add_option("--scenario", diag_src.scenario, "built-in scenario or scenario file")->required();
  diagnose->add_option("--n", diag_src.n, "sample size (sets p through the dimension rule)");
  diagnose->add_option("--p", diag_src.p, "dimension override");
  diagnose->add_option("--retained", retained_list, "0-based indices treated as retained, e.g. 0,2");
  diagnose->add_option("--threshold", threshold, "retention threshold for the strong signal and noise sets");
  diagnose->add_option("--margin", margin, "margin around the threshold");
  diagnose->add_flag("--json", diag_json, "print JSON");

  auto* realdata = app.add_subcommand("realdata", "prediction comparison on CSV data");
  std::string train_csv;
  std::string test_csv;
  std::string rd_response;
  std::string rd_methods = "lasso,sis,isis,ada,rar:10,mrar:10";
  RealDataOptions rd;
  bool rd_json = false;
  realdata->add_option("--train", train_csv, "training CSV")->required()->check(CLI::ExistingFile);
  realdata->add_option("--test", test_csv, "test CSV")->check(CLI::ExistingFile);
  realdata->add_option("--response", rd_response, "response column name or index");
  realdata->add_option("--methods", rd_methods, "comma-separated method list");
  realdata->add_option("--reps", rd.repetitions, "random re-splits (needs --train-size)")->check(CLI::PositiveNumber);
  realdata->add_option("--train-size", rd.train_size, "pool train and test rows and re-split with this many training rows");
  realdata->add_option("--folds", rd.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
  realdata->add_option("--seed", rd.seed, "split and permutation seed");
  realdata->add_flag("--json", rd_json, "print JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir, smoke, parallelism, reps, quiet);
    if (fit->parsed()) return cmd_fit(fit_src, fit_flags, emit, penalty_file, fit_out);
    if (screen->parsed()) return cmd_screen(screen_src, screen_m, screen_seed, screen_cap, screen_std, top);
    if (evaluate->parsed()) return cmd_evaluate(eval_src, eval_flags, metric, eval_test, eval_folds);
    if (diagnose->parsed()) return cmd_diagnose(diag_src, retained_list, threshold, margin, diag_json);
    if (realdata->parsed()) return cmd_realdata(train_csv, test_csv, rd_response, rd_methods, rd, rd_json);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
