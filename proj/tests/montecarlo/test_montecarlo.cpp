// Monte-Carlo properties over many seeds. Slow; labelled "slow" in ctest.
#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "rar/estimators.hpp"
#include "rar/gaussian_sim.hpp"
#include "rar/harness.hpp"
#include "rar/marginal_screen.hpp"
#include "rar/rng.hpp"
#include "rar/tuning.hpp"

using namespace rar;

namespace {

double sample_corr(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

std::uint64_t seed_of(const char* tag, int k) { return derive_seed(2024, {hash_tag(tag), static_cast<std::uint64_t>(k)}); }

}  // namespace

TEST(MonteCarlo, BlockCorrelationAtN5000) {
  ScenarioSpec s = builtin_scenario("1A", 5000);
  s.p = 40;
  const Matrix sigma = s.block_matrix();
  const Dataset d = sample_dataset(s, seed_of("block", 0));
  for (Index i = 0; i < sigma.rows(); ++i) {
    for (Index j = 0; j < sigma.cols(); ++j) {
      EXPECT_NEAR(sample_corr(d.x.col(i), d.x.col(j)), sigma(i, j), 0.08);
    }
  }
}

TEST(MonteCarlo, IsisFindsWeakSignalByIterationTwo) {
  const ScenarioSpec s = builtin_scenario("1A", 500);
  int hits = 0;
  const int seeds = 100;
  for (int k = 0; k < seeds; ++k) {
    const Dataset d = standardize(sample_dataset(s, seed_of("isis", k)));
    const IsisResult r = isis_select(d, IsisOptions{});
    bool found = false;
    for (std::size_t it = 0; it < std::min<std::size_t>(2, r.added.size()); ++it) {
      found = found || std::binary_search(r.added[it].begin(), r.added[it].end(), Index{1});
    }
    hits += found;
  }
  RecordProperty("hits", hits);
  EXPECT_GE(hits, 80);
}

// The largest null marginal is close to exchangeable with the m permutation maxima, so
// excluding every null feature happens with probability about m / (m + 1).
TEST(MonteCarlo, PermutationThresholdBand) {
  const ScenarioSpec s = builtin_scenario("1A", 500);
  const Vector sb = population_diagnostics(s).marginal_coef;
  const int seeds = 200;
  for (int m : {10, 30}) {
    int signal = 0;
    int hits = 0;
    for (int k = 0; k < seeds; ++k) {
      const Dataset d = standardize(sample_dataset(s, seed_of("gamma", k)));
      const double gamma = permutation_threshold(d, m, seed_of("perm", k));
      const MarginalStats st = marginal_coefficients(d);
      bool ok = std::abs(st.coef[0]) > gamma;
      signal += ok;
      for (Index j = 0; j < d.p() && ok; ++j) {
        if (sb[j] == 0.0 && std::abs(st.coef[j]) > gamma) ok = false;
      }
      hits += ok;
    }
    RecordProperty("hits_m" + std::to_string(m), hits);
    EXPECT_EQ(signal, seeds) << "m = " << m;
    const double q = static_cast<double>(m) / (m + 1);
    const double se = std::sqrt(q * (1 - q) / seeds);
    EXPECT_NEAR(static_cast<double>(hits) / seeds, q, 3 * se) << "m = " << m;
    if (m >= 30) EXPECT_GE(hits, static_cast<int>(0.95 * seeds));
  }
}

TEST(MonteCarlo, CvOverSelects) {
  const ScenarioSpec s = builtin_scenario("1A", 500);
  int hits = 0;
  const int seeds = 25;
  for (int k = 0; k < seeds; ++k) {
    const Dataset d = standardize(sample_dataset(s, seed_of("cv", k)));
    const CvResult cv = kfold_cv(d, PenaltyProfile::uniform(d.p()), 5, SolverConfig{}, seed_of("folds", k));
    hits += cv.beta.support().size() > 4;
  }
  RecordProperty("hits", hits);
  EXPECT_GE(hits, 20);
}

TEST(MonteCarlo, GicSignConsistentWhenTruthOnPath) {
  ScenarioSpec s = builtin_scenario("1A", 500);
  s.sigma = 0.01;
  int on_path = 0;
  int hits = 0;
  for (int k = 0; k < 40; ++k) {
    const Dataset d = sample_dataset(s, seed_of("gic", k));
    const Dataset w = standardize(d);
    const SolutionPath path = fit_path(w, PenaltyProfile::uniform(w.p()), SolverConfig{});
    const SignPattern truth = sign_of(*d.truth);
    if (!path_recovers(path, truth)) continue;
    ++on_path;
    const GicChoice g = gic_select(w, path);
    hits += sign_of(path.betas[static_cast<std::size_t>(g.index)]) == truth;
  }
  RecordProperty("on_path", on_path);
  RecordProperty("hits", hits);
  ASSERT_GE(on_path, 30);
  EXPECT_GE(hits, static_cast<int>(std::ceil(0.95 * on_path)));
}

TEST(MonteCarlo, TrueSupportRefitBeatsNullModel) {
  ScenarioSpec s = builtin_scenario("1A", 200);
  s.p = 400;
  double refit = 0.0;
  double null = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Dataset train = sample_dataset(s, seed_of("refit-train", k));
    const Dataset test = sample_dataset(s, seed_of("refit-test", k));
    const OlsResult ols = constrained_ols(train, s.support());
    refit += prediction_mse(ols.beta, ols.intercept, test);
    null += prediction_mse(CoefficientVector::zeros(train.p()), train.y.mean(), test);
  }
  EXPECT_LE(refit, null);
}

TEST(MonteCarlo, MrarSmallerThanLassoOnSplits) {
  const ScenarioSpec s = builtin_scenario("1A", 300);
  RealDataOptions opt;
  int hits = 0;
  const int splits = 20;
  for (int k = 0; k < splits; ++k) {
    const Dataset d = sample_dataset(s, seed_of("split", k));
    Rng rng = make_rng(seed_of("split-perm", k));
    const auto perm = random_permutation(d.n(), rng);
    const std::vector<Index> tr(perm.begin(), perm.begin() + 240);
    const std::vector<Index> te(perm.begin() + 240, perm.end());
    const Dataset train = d.rows(tr);
    const Dataset test = d.rows(te);
    const auto lasso = evaluate_prediction(parse_method_spec("lasso"), train, test, opt, seed_of("eval", k));
    const auto mrar = evaluate_prediction(parse_method_spec("mrar:10"), train, test, opt, seed_of("eval", k));
    hits += mrar.model_size < lasso.model_size;
  }
  RecordProperty("hits", hits);
  EXPECT_GE(hits, 14);
}
