#include "rar/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rar/rng.hpp"

namespace rar {

bool path_recovers(const SolutionPath& path, const SignPattern& truth, double zero_tol) {
  for (const auto& b : path.betas) {
    if (b.size() != truth.size()) throw Error("path_recovers: truth length mismatch");
    if (sign_of(b, zero_tol) == truth) return true;
  }
  return false;
}

bool oracle_sign_success(const EstimatorOutput& output, const SignPattern& truth, double zero_tol) {
  if (path_recovers(output.primary_path, truth, zero_tol)) return true;
  return std::any_of(output.stage3.begin(), output.stage3.end(),
                     [&](const Stage3Fit& s) { return path_recovers(s.path, truth, zero_tol); });
}

double gic_score(double rss, Index df, Index n, Index p, double multiplier) {
  const double nd = static_cast<double>(n);
  return nd * std::log(std::max(rss, 1e-12) / nd) +
         multiplier * static_cast<double>(df) * std::log(std::log(nd)) * std::log(static_cast<double>(p));
}

GicChoice gic_select(const Dataset& data, const SolutionPath& path, double multiplier) {
  if (path.empty()) throw Error("gic_select: empty path");
  GicChoice out;
  out.scores.resize(path.lambdas.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    const auto& b = path.betas[k];
    const double rss = residual_sum_squares(data, b, path.intercepts[k]);
    const double s = gic_score(rss, static_cast<Index>(b.support().size()), data.n(), data.p(), multiplier);
    out.scores[k] = s;
    const bool better = s < best || (s == best && path.lambdas[k] > out.lambda);
    if (better) {
      best = s;
      out.index = static_cast<Index>(k);
      out.lambda = path.lambdas[k];
    }
  }
  return out;
}

std::vector<int> make_folds(Index n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw Error("make_folds: need 2 <= k <= n");
  Rng rng = make_rng(seed);
  const auto perm = random_permutation(n, rng);
  std::vector<int> folds(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) folds[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = static_cast<int>(i % k);
  return folds;
}

CvResult kfold_cv(const Dataset& data, const PenaltyProfile& profile, int k, const SolverConfig& config,
                  std::uint64_t seed) {
  return kfold_cv(data, profile, make_folds(data.n(), k, seed), config);
}

CvResult kfold_cv(const Dataset& data, const PenaltyProfile& profile, const std::vector<int>& folds,
                  const SolverConfig& config) {
  if (static_cast<Index>(folds.size()) != data.n()) throw Error("kfold_cv: fold labels must cover every row");
  const int k = folds.empty() ? 0 : *std::max_element(folds.begin(), folds.end()) + 1;
  if (k < 2) throw Error("kfold_cv: need at least two folds");

  CvResult res;
  res.full_path = fit_path(data, profile, config);
  res.lambdas = res.full_path.lambdas;
  const std::size_t m = res.lambdas.size();

  std::vector<std::vector<double>> fold_mse(static_cast<std::size_t>(k), std::vector<double>(m, 0.0));
  std::vector<Index> fold_size(static_cast<std::size_t>(k), 0);
  for (int f = 0; f < k; ++f) {
    std::vector<Index> train;
    std::vector<Index> test;
    for (Index i = 0; i < data.n(); ++i) (folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    if (test.empty()) throw Error("kfold_cv: empty fold");
    if (train.size() < 2) throw Error("kfold_cv: training part smaller than two rows");
    const Dataset tr = data.rows(train);
    const Dataset te = data.rows(test);
    const SolutionPath p = fit_path(tr, profile, res.lambdas, config);
    for (std::size_t l = 0; l < m; ++l) {
      fold_mse[static_cast<std::size_t>(f)][l] = prediction_mse(p.betas[l], p.intercepts[l], te);
    }
    fold_size[static_cast<std::size_t>(f)] = static_cast<Index>(test.size());
  }

  res.cv_error.assign(m, 0.0);
  res.cv_se.assign(m, 0.0);
  const double nd = static_cast<double>(data.n());
  for (std::size_t l = 0; l < m; ++l) {
    double mean = 0.0;
    for (int f = 0; f < k; ++f) {
      mean += fold_mse[static_cast<std::size_t>(f)][l] * static_cast<double>(fold_size[static_cast<std::size_t>(f)]);
    }
    mean /= nd;
    double var = 0.0;
    for (int f = 0; f < k; ++f) {
      const double d = fold_mse[static_cast<std::size_t>(f)][l] - mean;
      var += d * d * static_cast<double>(fold_size[static_cast<std::size_t>(f)]);
    }
    var /= nd;
    res.cv_error[l] = mean;
    res.cv_se[l] = std::sqrt(var / static_cast<double>(k - 1));
  }
  res.best = static_cast<Index>(std::min_element(res.cv_error.begin(), res.cv_error.end()) - res.cv_error.begin());
  res.lambda = res.lambdas[static_cast<std::size_t>(res.best)];
  res.beta = res.full_path.betas[static_cast<std::size_t>(res.best)];
  res.intercept = res.full_path.intercepts[static_cast<std::size_t>(res.best)];
  return res;
}

double prediction_mse(const CoefficientVector& beta, double intercept, const Dataset& test) {
  if (beta.size() != test.p()) throw Error("prediction_mse: dimension mismatch");
  Vector r = test.y.array() - intercept;
  for (Index j : beta.support()) r -= beta[j] * test.x.col(j);
  return r.squaredNorm() / static_cast<double>(test.n());
}

}  // namespace rar
