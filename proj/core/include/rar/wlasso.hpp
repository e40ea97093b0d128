#pragma once

#include <optional>
#include <vector>

#include "rar/core_model.hpp"

namespace rar {

enum class SolverEngine {
  Auto,      ///< Gram when the free set is small, Residual otherwise
  Residual,  ///< naive updates on the residual vector; strong-rule screening per lambda
  Gram,      ///< covariance updates on X_F'X_F; Unpenalized block profiled out exactly
};

struct SolverConfig {
  int max_iters = 100000;         ///< coordinate sweeps allowed per lambda
  double tol = 1e-7;              ///< stop when the largest coefficient change in a sweep is below this
  int n_lambda = 100;
  double lambda_min_ratio = 1e-3;
  double kkt_tol = 1e-4;          ///< tolerance recorded with each path
  /// Stop a generated path once the deviance ratio exceeds dev_ratio_max or its relative gain
  /// drops below dev_change_min (checked from the fifth lambda on).
  bool early_stop = true;
  double dev_ratio_max = 0.999;
  double dev_change_min = 1e-5;
  SolverEngine engine = SolverEngine::Auto;
  Index gram_max_features = 1000;
  bool trace_objective = false;
  /// Residual engine: after a run of sweeps on a stable nonzero set, try the exact solve on
  /// that set with signs fixed (accepted only if signs hold and the objective drops).
  bool newton_polish = true;

  void validate() const;
};

struct LambdaGrid {
  std::vector<double> lambdas;  ///< strictly decreasing
  double lambda_max = 0.0;
  bool rank_deficient = false;  ///< Unpenalized submatrix was rank deficient; r0 used the min-norm fit
};

struct FitResult {
  CoefficientVector beta;
  double intercept = 0.0;
  bool converged = false;
  int sweeps = 0;
  double kkt_violation = 0.0;
  bool rank_deficient = false;
  std::vector<double> objective_trace;  ///< per sweep, when SolverConfig::trace_objective
};

struct SolutionPath {
  std::vector<double> lambdas;
  std::vector<CoefficientVector> betas;
  std::vector<double> intercepts;
  std::vector<char> converged;
  std::vector<double> kkt_violation;
  std::vector<int> sweeps;
  double kkt_tol = 1e-4;
  bool rank_deficient = false;

  Index size() const noexcept { return static_cast<Index>(lambdas.size()); }
  bool empty() const noexcept { return lambdas.empty(); }
  bool all_converged() const;
  double max_kkt_violation() const;
};

struct KktReport {
  double max_violation = 0.0;
  std::vector<char> violated;  ///< per coordinate
  bool passed = true;
};

struct OlsResult {
  CoefficientVector beta;
  double intercept = 0.0;
  bool rank_deficient = false;
};

/// Centered cross-products X_C'X_C/n and X_C'y/n for a fixed column set C. Gram-engine fits
/// whose free columns lie in C read from the cache instead of touching X again.
class GramCache {
 public:
  GramCache(const Dataset& data, IndexSet columns);

  const Dataset& data() const noexcept { return *data_; }
  const IndexSet& columns() const noexcept { return columns_; }
  /// Position of column j inside the cache, or -1.
  Index position(Index j) const;
  const Matrix& gram() const noexcept { return gram_; }
  const Vector& cross() const noexcept { return cross_; }

 private:
  const Dataset* data_;
  IndexSet columns_;
  Matrix gram_;
  Vector cross_;
};

/// lambda_max = max over Weighted j of |X_j' r0| / (n w_j), r0 the residual of y on the
/// Unpenalized columns (centered), followed by a geometric grid down to lambda_max * min_ratio.
LambdaGrid lambda_grid(const Dataset& data, const PenaltyProfile& profile, const SolverConfig& config);

/// Minimizes (2n)^-1 ||y - b0 - X beta||^2 + lambda * sum_j w_j |beta_j| with Excluded
/// coordinates fixed at zero and Unpenalized ones carrying w_j = 0.
FitResult fit(const Dataset& data, const PenaltyProfile& profile, double lambda,
              const std::optional<CoefficientVector>& warm, const SolverConfig& config);

/// Warm-started path over lambda_grid(...); may end early (see SolverConfig::early_stop).
SolutionPath fit_path(const Dataset& data, const PenaltyProfile& profile, const SolverConfig& config);

/// Warm-started path over a caller-supplied decreasing grid; never stops early.
SolutionPath fit_path(const Dataset& data, const PenaltyProfile& profile, const std::vector<double>& lambdas,
                      const SolverConfig& config);

/// Path through a GramCache; every non-Excluded column of the profile must be cached.
SolutionPath fit_path(const GramCache& cache, const PenaltyProfile& profile, const SolverConfig& config);

/// Subgradient conditions with g_j = X_j'(y - b0 - X beta)/n and the intercept profiled out:
/// Unpenalized |g_j| <= tol; Weighted zero |g_j| <= lambda w_j + tol;
/// Weighted nonzero |g_j - lambda w_j sign(beta_j)| <= tol; Excluded unconstrained.
KktReport kkt_check(const Dataset& data, const PenaltyProfile& profile, double lambda,
                    const CoefficientVector& beta, double tol);

/// kkt_check for every step of a path, with the gradients computed in blocks.
std::vector<KktReport> kkt_check_path(const Dataset& data, const PenaltyProfile& profile, const SolutionPath& path,
                                      double tol);

/// Least squares on the support columns (with intercept), min-norm when rank deficient.
OlsResult constrained_ols(const Dataset& data, const IndexSet& support);

/// Penalized objective at (beta, intercept).
double objective(const Dataset& data, const PenaltyProfile& profile, double lambda, const CoefficientVector& beta,
                 double intercept);

/// Residual sum of squares of y - b0 - X beta.
double residual_sum_squares(const Dataset& data, const CoefficientVector& beta, double intercept);

}  // namespace rar
