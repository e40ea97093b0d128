#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rar/core_model.hpp"
#include "rar/estimators.hpp"
#include "rar/wlasso.hpp"

namespace rar {

/// True iff some solution on the path has exactly the given sign pattern.
bool path_recovers(const SolutionPath& path, const SignPattern& truth, double zero_tol = kDefaultZeroTol);

/// Oracle path criterion: any primary-path solution, or any MRAR stage-3 solution, matches.
bool oracle_sign_success(const EstimatorOutput& output, const SignPattern& truth, double zero_tol = kDefaultZeroTol);

struct GicChoice {
  Index index = 0;
  double lambda = 0.0;
  std::vector<double> scores;
};

/// n log(max(RSS, 1e-12)/n) + multiplier * df * log(log n) * log p, df = |support|.
double gic_score(double rss, Index df, Index n, Index p, double multiplier = 1.0);

/// Minimizes gic_score over the path; ties go to the larger lambda.
GicChoice gic_select(const Dataset& data, const SolutionPath& path, double multiplier = 1.0);

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> cv_error;  ///< mean held-out squared error per lambda
  std::vector<double> cv_se;     ///< standard error of the fold means
  Index best = 0;
  double lambda = 0.0;
  CoefficientVector beta;        ///< full-data solution at the chosen lambda
  double intercept = 0.0;
  SolutionPath full_path;
};

/// Fold labels 0..k-1 from a seeded shuffle; fold sizes differ by at most one.
std::vector<int> make_folds(Index n, int k, std::uint64_t seed);

/// K-fold CV over the full-data lambda grid; picks the minimum mean error.
CvResult kfold_cv(const Dataset& data, const PenaltyProfile& profile, int k, const SolverConfig& config,
                  std::uint64_t seed);
CvResult kfold_cv(const Dataset& data, const PenaltyProfile& profile, const std::vector<int>& folds,
                  const SolverConfig& config);

/// Mean of (y - intercept - x'beta)^2 over the rows of test.
double prediction_mse(const CoefficientVector& beta, double intercept, const Dataset& test);

struct EvalResult {
  std::optional<bool> oracle_sign_success;
  double selected_lambda = 0.0;
  CoefficientVector selected_beta;
  double intercept = 0.0;
  std::optional<double> test_mse;
  Index model_size = 0;
};

}  // namespace rar
