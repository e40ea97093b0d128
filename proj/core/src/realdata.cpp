#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rar/harness.hpp"
#include "rar/rng.hpp"

namespace rar {
namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::nullopt;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Profile of the step whose lambda is tuned by cross-validation.
PenaltyProfile final_step_profile(const MethodSpec& spec, const Dataset& w, EstimatorConfig ec, std::uint64_t seed) {
  ec.permutations = std::max(1, spec.permutations);
  ec.seed = derive_seed(seed, {hash_tag("retention"), static_cast<std::uint64_t>(ec.permutations)});
  ec.stage3 = Stage3Mode::Gic;
  // Only the profile is needed, but the estimator fits its path along the way.
  const EstimatorOutput out = run_method_on_working(spec.method, w, ec);
  if (spec.method == Method::Mrar && !out.stage3.empty()) return out.stage3.front().profile;
  return out.primary_profile;
}

}  // namespace

double RealDataSummary::mean_mse() const { return mean_of(test_mse); }
double RealDataSummary::mean_best_mse() const { return mean_of(best_path_mse); }
double RealDataSummary::mean_size() const { return mean_of(model_size); }
std::optional<double> RealDataSummary::sd_mse() const { return sd_of(test_mse); }
std::optional<double> RealDataSummary::sd_best_mse() const { return sd_of(best_path_mse); }
std::optional<double> RealDataSummary::sd_size() const { return sd_of(model_size); }

EvalResult evaluate_prediction(const MethodSpec& spec, const Dataset& train, const Dataset& test,
                               const RealDataOptions& options, std::uint64_t seed, double* best_path_mse) {
  if (train.p() != test.p()) throw Error("realdata: train and test have different column counts");
  const Dataset w = working_data(train, options.estimator);
  const PenaltyProfile prof = final_step_profile(spec, w, options.estimator, seed);
  const int folds = std::min<int>(options.folds, static_cast<int>(w.n()));
  const CvResult cv = kfold_cv(w, prof, folds, options.estimator.solver, derive_seed(seed, {hash_tag("cv")}));

  EstimatorOutput scaling;
  scaling.center = w.column_means;
  scaling.scale = w.column_scales;
  EvalResult res;
  const auto [beta, b0] = to_original_scale(scaling, cv.beta, cv.intercept);
  res.selected_lambda = cv.lambda;
  res.selected_beta = beta;
  res.intercept = b0;
  res.model_size = static_cast<Index>(beta.support().size());
  res.test_mse = prediction_mse(beta, b0, test);
  if (best_path_mse) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cv.full_path.betas.size(); ++k) {
      const auto [b, c] = to_original_scale(scaling, cv.full_path.betas[k], cv.full_path.intercepts[k]);
      best = std::min(best, prediction_mse(b, c, test));
    }
    *best_path_mse = best;
  }
  return res;
}

std::vector<RealDataSummary> run_realdata(const Dataset& train, const Dataset& test, const RealDataOptions& options) {
  if (options.methods.empty()) throw Error("realdata: no methods");
  if (options.repetitions < 1) throw Error("realdata: repetitions must be >= 1");
  if (train.p() != test.p()) throw Error("realdata: train and test have different column counts");

  Dataset pooled;
  if (options.train_size > 0) {
    pooled.x.resize(train.n() + test.n(), train.p());
    pooled.x << train.x, test.x;
    pooled.y.resize(train.n() + test.n());
    pooled.y << train.y, test.y;
    pooled = Dataset::make(std::move(pooled.x), std::move(pooled.y));
    if (options.train_size < 2 || options.train_size >= pooled.n()) throw Error("realdata: bad train_size");
  }

  std::vector<RealDataSummary> out(options.methods.size());
  for (std::size_t m = 0; m < options.methods.size(); ++m) out[m].method = options.methods[m].label();
  for (int r = 0; r < options.repetitions; ++r) {
    const std::uint64_t seed = derive_seed(options.seed, {static_cast<std::uint64_t>(r)});
    Dataset tr;
    Dataset te;
    if (options.train_size > 0) {
      Rng rng = make_rng(derive_seed(seed, {hash_tag("split")}));
      const auto perm = random_permutation(pooled.n(), rng);
      std::vector<Index> a(perm.begin(), perm.begin() + options.train_size);
      std::vector<Index> b(perm.begin() + options.train_size, perm.end());
      tr = pooled.rows(a);
      te = pooled.rows(b);
    } else {
      tr = train;
      te = test;
    }
    for (std::size_t m = 0; m < options.methods.size(); ++m) {
      double best = 0.0;
      const EvalResult e = evaluate_prediction(options.methods[m], tr, te, options, seed, &best);
      out[m].test_mse.push_back(*e.test_mse);
      out[m].best_path_mse.push_back(best);
      out[m].model_size.push_back(static_cast<double>(e.model_size));
    }
  }
  return out;
}

}  // namespace rar
