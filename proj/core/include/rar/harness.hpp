#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rar/config.hpp"
#include "rar/estimators.hpp"
#include "rar/gaussian_sim.hpp"
#include "rar/tuning.hpp"

namespace rar {

/// One estimator column of an experiment, e.g. "lasso" or "mrar:5".
struct MethodSpec {
  Method method = Method::Lasso;
  int permutations = 0;  ///< RAR/MRAR only

  /// Row label as printed in tables: Lasso, SIS-lasso, ..., RAR_30, MRAR_1.
  std::string label() const;
  /// Config spelling: lasso, sis, isis, ada, rar:30, mrar:1.
  std::string key() const;
  bool operator==(const MethodSpec&) const = default;
};

MethodSpec parse_method_spec(const std::string& text);

struct ExperimentConfig {
  std::vector<ScenarioSpec> scenarios;
  std::vector<Index> ns;
  std::vector<MethodSpec> methods;
  int replications = 200;
  std::uint64_t root_seed = 20240501;
  int parallelism = 1;
  EstimatorConfig estimator;
  bool verify_kkt = false;  ///< run kkt_check on every path solution (slow)
  double kkt_tol = 1e-4;
  std::string out_dir;

  void validate() const;

  /// Keys: scenario (repeatable; builtin name or path to a scenario file), n, methods,
  /// replications, root_seed, parallelism, out, verify_kkt, and solver/estimator knobs.
  static ExperimentConfig from_config(const KeyValueFile& kv);
  /// Published grid: n in {100,...,500}, 200 replications, every method.
  static ExperimentConfig full_grid();
  /// 25 replications at n in {300, 500}.
  static ExperimentConfig smoke();
};

/// Worker count: RAR_WORKERS when set and positive, else the requested value.
int resolve_parallelism(int requested);

struct MethodRecord {
  std::string label;
  std::optional<bool> success;  ///< nullopt on a hard error
  std::string error;
  bool converged = true;
  double max_kkt = 0.0;          ///< largest violation recorded by the solver
  std::optional<double> checked_kkt;  ///< from kkt_check when verify_kkt is set
  Index kkt_failures = 0;        ///< solutions failing kkt_check at kkt_tol
  Index solutions = 0;           ///< path solutions (primary plus stage 3)
  std::optional<IndexSet> retained;
  double seconds = 0.0;
};

struct ReplicationRecord {
  std::string scenario;
  Index n = 0;
  Index p = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;
  std::vector<MethodRecord> methods;
};

struct TableCell {
  Index successes = 0;
  Index reps = 0;      ///< replications counted (hard errors excluded)
  Index failures = 0;  ///< hard errors

  double proportion() const;
  double standard_error() const;
  bool operator==(const TableCell&) const = default;
};

/// Rows are methods, columns (n, p) pairs in ascending n.
struct SignRecoveryTable {
  std::string scenario;
  std::vector<std::string> methods;
  std::vector<std::pair<Index, Index>> columns;
  std::vector<std::vector<TableCell>> cells;  ///< [method][column]

  const TableCell& cell(const std::string& method, Index n) const;
  bool operator==(const SignRecoveryTable&) const = default;
};

struct ExperimentResult {
  std::vector<SignRecoveryTable> tables;  ///< one per scenario
  std::vector<ReplicationRecord> records; ///< in (scenario, n, replication) order
  std::vector<std::string> warnings;
};

/// Seed of replication r of (scenario, n).
std::uint64_t replication_seed(std::uint64_t root, const std::string& scenario, Index n, int replication);

/// Stable hash of x and y contents.
std::uint64_t dataset_hash(const Dataset& data);

/// Runs one replication: every method sees the same dataset.
ReplicationRecord run_replication(const ExperimentConfig& config, const ScenarioSpec& scenario, int replication);

/// Runs every (scenario, n, replication) and aggregates. Results do not depend on parallelism.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Same, reporting progress through a callback (called from worker threads under a lock).
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(const ReplicationRecord&)>& on_done);

SignRecoveryTable aggregate(const std::string& scenario, const std::vector<MethodSpec>& methods,
                            const std::vector<ReplicationRecord>& records);

/// One JSON object per line.
void write_events(const ExperimentResult& result, std::ostream& out);
std::string record_to_json(const ReplicationRecord& record);

enum class TableFormat { Csv, Json, Markdown };
TableFormat parse_table_format(const std::string& name);

/// Throws on an empty table (no methods or no columns).
void emit_table(const SignRecoveryTable& table, TableFormat format, std::ostream& out);
void emit_table(const SignRecoveryTable& table, TableFormat format, const std::string& path);
SignRecoveryTable table_from_json(const std::string& text);

struct RealDataOptions {
  std::vector<MethodSpec> methods;
  int repetitions = 1;
  int folds = 5;
  Index train_size = 0;      ///< 0: train on `train`, test on `test` without resplitting
  std::uint64_t seed = 1;
  EstimatorConfig estimator;
};

struct RealDataSummary {
  std::string method;
  std::vector<double> test_mse;
  std::vector<double> best_path_mse;
  std::vector<double> model_size;

  double mean_mse() const;
  double mean_best_mse() const;
  double mean_size() const;
  /// Standard deviations; nullopt with fewer than two repetitions.
  std::optional<double> sd_mse() const;
  std::optional<double> sd_best_mse() const;
  std::optional<double> sd_size() const;
};

/// Prediction workflow: CV for the last regularization step, GIC for MRAR's stage 2.
/// With train_size > 0 the rows of train and test are pooled and re-split per repetition.
std::vector<RealDataSummary> run_realdata(const Dataset& train, const Dataset& test, const RealDataOptions& options);

/// Fit and tune one method on a training set, evaluating on a test set.
EvalResult evaluate_prediction(const MethodSpec& method, const Dataset& train, const Dataset& test,
                               const RealDataOptions& options, std::uint64_t seed, double* best_path_mse = nullptr);

}  // namespace rar
