#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rar/estimators.hpp"
#include "rar/gaussian_sim.hpp"
#include "rar/tuning.hpp"

using namespace rar;

namespace {

Dataset scenario_data(const std::string& name, Index n, Index p, std::uint64_t seed) {
  ScenarioSpec s = builtin_scenario(name, n);
  s.p = p;
  return sample_dataset(s, seed);
}

void expect_same_path(const SolutionPath& a, const SolutionPath& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.betas.size(); ++k) {
    EXPECT_EQ(a.lambdas[k], b.lambdas[k]);
    EXPECT_EQ(a.betas[k].values(), b.betas[k].values());
  }
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::Lasso, Method::AdaLasso, Method::SisLasso, Method::IsisLasso, Method::Rar, Method::Mrar}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_THROW(parse_method("scad"), Error);
}

TEST(Lasso, EqualsUnitWeightPath) {
  const Dataset d = scenario_data("1A", 80, 200, 1);
  EstimatorConfig cfg;
  const EstimatorOutput out = run_lasso(d, cfg);
  const SolutionPath direct = fit_path(standardize(d), PenaltyProfile::uniform(200), cfg.solver);
  expect_same_path(out.primary_path, direct);
  EXPECT_TRUE(out.standardized);
}

TEST(Lasso, OriginalScalePrediction) {
  const Dataset d = scenario_data("1A", 80, 100, 2);
  EstimatorConfig cfg;
  const EstimatorOutput out = run_lasso(d, cfg);
  const Dataset w = working_data(d, cfg);
  const std::size_t k = out.primary_path.betas.size() / 2;
  const auto [b, b0] = to_original_scale(out, out.primary_path.betas[k], out.primary_path.intercepts[k]);
  const Vector fitted_w = w.x * out.primary_path.betas[k].values() + Vector::Constant(80, out.primary_path.intercepts[k]);
  const Vector fitted_o = d.x * b.values() + Vector::Constant(80, b0);
  EXPECT_LE((fitted_w - fitted_o).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Lasso, RawScaleOption) {
  const Dataset d = scenario_data("2C", 60, 50, 3);
  EstimatorConfig cfg;
  cfg.standardize = false;
  const EstimatorOutput out = run_lasso(d, cfg);
  EXPECT_FALSE(out.standardized);
  expect_same_path(out.primary_path, fit_path(d, PenaltyProfile::uniform(50), cfg.solver));
}

TEST(AdaLasso, ConstantWeightsGiveLassoArgmins) {
  // Marginal coefficients all equal to c: weights 1/c, so lambda c gives the same argmin.
  std::mt19937_64 gen(4);
  Matrix x = oracle::orthonormal_design(40, 5, gen);
  const Vector y = x.rowwise().sum() * 0.7;
  const Dataset d = Dataset::make(x, y);
  EstimatorConfig cfg;
  cfg.standardize = false;
  const MarginalStats st = marginal_coefficients(d);
  for (Index j = 0; j < 5; ++j) ASSERT_NEAR(st.coef[j], 0.7, 1e-12);
  const EstimatorOutput ada = run_ada_lasso(d, cfg);
  const SolutionPath ref = fit_path(d, PenaltyProfile::uniform(5), cfg.solver);
  ASSERT_EQ(ada.primary_path.size(), ref.size());
  for (std::size_t k = 0; k < ref.betas.size(); ++k) {
    EXPECT_NEAR(ada.primary_path.lambdas[k], ref.lambdas[k] * 0.7, 1e-12);
    EXPECT_LE((ada.primary_path.betas[k].values() - ref.betas[k].values()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(AdaLasso, ZeroMarginalExcluded) {
  Matrix x(4, 2);
  x << 1, 1, -1, 1, 1, -1, -1, -1;
  Vector y(4);
  y << 1, -1, 1, -1;
  const EstimatorOutput out = run_ada_lasso(Dataset::make(x, y), EstimatorConfig{});
  EXPECT_EQ(out.primary_profile.kind(1), PenaltyKind::Excluded);
  EXPECT_EQ(out.primary_profile.kind(0), PenaltyKind::Weighted);
  EXPECT_THROW(run_ada_lasso(Dataset::make(x, Vector::Zero(4)), EstimatorConfig{}), Error);
}

TEST(SisLasso, FullScreenIsLasso) {
  const Dataset d = scenario_data("1A", 60, 40, 5);
  EstimatorConfig cfg;
  cfg.screen_size = 40;
  expect_same_path(run_sis_lasso(d, cfg).primary_path, run_lasso(d, cfg).primary_path);
  cfg.screen_size = 41;
  EXPECT_THROW(run_sis_lasso(d, cfg), Error);
}

TEST(SisLasso, ZeroOutsideScreen) {
  const Dataset d = scenario_data("1A", 100, 300, 6);
  const EstimatorOutput out = run_sis_lasso(d, EstimatorConfig{});
  ASSERT_TRUE(out.screened);
  EXPECT_EQ(static_cast<Index>(out.screened->size()), default_screen_size(100));
  for (const auto& b : out.primary_path.betas) EXPECT_TRUE(is_subset(b.support(), *out.screened));
}

TEST(IsisLasso, OneIterationIsSis) {
  const Dataset d = scenario_data("1B", 100, 300, 7);
  EstimatorConfig cfg;
  cfg.isis.iterations = 1;
  cfg.isis.per_iter = default_screen_size(100);
  expect_same_path(run_isis_lasso(d, cfg).primary_path, run_sis_lasso(d, cfg).primary_path);
}

TEST(Rar, InfiniteGammaIsLasso) {
  const Dataset d = scenario_data("1A", 80, 200, 8);
  EstimatorConfig cfg;
  cfg.gamma = std::numeric_limits<double>::infinity();
  const EstimatorOutput out = run_rar(d, cfg);
  EXPECT_TRUE(out.degraded);
  ASSERT_TRUE(out.retention);
  EXPECT_TRUE(out.retention->retained.empty());
  expect_same_path(out.primary_path, run_lasso(d, cfg).primary_path);
}

TEST(Rar, RetainedAreUnpenalized) {
  const Dataset d = scenario_data("1A", 200, 400, 9);
  EstimatorConfig cfg;
  cfg.permutations = 5;
  cfg.seed = 3;
  const EstimatorOutput out = run_rar(d, cfg);
  ASSERT_TRUE(out.retention);
  const Dataset w = working_data(d, cfg);
  EXPECT_EQ(out.retention->gamma, permutation_threshold(w, 5, 3));
  EXPECT_LE(static_cast<Index>(out.retention->retained.size()), retention_cap(200));
  for (Index j : out.retention->retained) {
    EXPECT_EQ(out.primary_profile.kind(j), PenaltyKind::Unpenalized);
    for (const auto& b : out.primary_path.betas) EXPECT_NE(b[j], 0.0);
  }
}

TEST(Mrar, EmptyRetentionReportsStage2) {
  const Dataset d = scenario_data("1A", 80, 200, 10);
  EstimatorConfig cfg;
  cfg.gamma = std::numeric_limits<double>::infinity();
  const EstimatorOutput out = run_mrar(d, cfg);
  EXPECT_EQ(out.method, Method::Mrar);
  EXPECT_TRUE(out.stage3.empty());
  expect_same_path(out.primary_path, run_lasso(d, cfg).primary_path);
}

TEST(Mrar, Stage3Structure) {
  const Dataset d = scenario_data("1B", 150, 400, 11);
  EstimatorConfig cfg;
  cfg.permutations = 10;
  cfg.seed = 5;
  const EstimatorOutput out = run_mrar(d, cfg);
  ASSERT_TRUE(out.retention);
  const IndexSet& R = out.retention->retained;
  ASSERT_FALSE(R.empty());
  ASSERT_FALSE(out.stage3.empty());
  std::set<IndexSet> qs;
  std::size_t covered = 0;
  for (const auto& s : out.stage3) {
    EXPECT_TRUE(set_intersection(s.q, R).empty());
    EXPECT_TRUE(qs.insert(s.q).second) << "duplicate Q";
    covered += s.stage2_indices.size();
    for (Index k : s.stage2_indices) {
      EXPECT_EQ(set_difference(out.primary_path.betas[static_cast<std::size_t>(k)].support(), R), s.q);
    }
    const IndexSet allowed = set_union(R, s.q);
    for (const auto& b : s.path.betas) EXPECT_TRUE(is_subset(b.support(), allowed));
    for (Index j : R) EXPECT_EQ(s.profile.kind(j), PenaltyKind::Weighted);
    for (Index j : s.q) EXPECT_EQ(s.profile.kind(j), PenaltyKind::Unpenalized);
  }
  EXPECT_EQ(covered, out.primary_path.betas.size());
}

TEST(Mrar, KktOnEveryPath) {
  const Dataset d = scenario_data("2C", 150, 400, 12);
  EstimatorConfig cfg;
  cfg.permutations = 5;
  const EstimatorOutput out = run_mrar(d, cfg);
  const Dataset w = working_data(d, cfg);
  auto check = [&](const SolutionPath& p, const PenaltyProfile& prof) {
    for (std::size_t k = 0; k < p.betas.size(); ++k) {
      EXPECT_TRUE(kkt_check(w, prof, p.lambdas[k], p.betas[k], 1e-4).passed);
    }
  };
  check(out.primary_path, out.primary_profile);
  for (const auto& s : out.stage3) check(s.path, s.profile);
}

TEST(Mrar, GicModeSingleQ) {
  const Dataset d = scenario_data("1B", 150, 400, 13);
  EstimatorConfig cfg;
  cfg.stage3 = Stage3Mode::Gic;
  const EstimatorOutput out = run_mrar(d, cfg);
  if (out.retention->retained.empty()) GTEST_SKIP();
  ASSERT_EQ(out.stage3.size(), 1u);
  ASSERT_TRUE(out.q_set);
  EXPECT_EQ(*out.q_set, out.stage3.front().q);
  const Index k = gic_select(working_data(d, cfg), out.primary_path).index;
  EXPECT_EQ(out.stage3.front().stage2_indices, std::vector<Index>{k});
}

TEST(Mrar, FromRarMatchesDirect) {
  const Dataset d = scenario_data("1B", 120, 300, 14);
  EstimatorConfig cfg;
  const EstimatorOutput a = run_mrar(d, cfg);
  const EstimatorOutput b = mrar_from_rar(d, run_rar(d, cfg), cfg);
  ASSERT_EQ(a.stage3.size(), b.stage3.size());
  for (std::size_t i = 0; i < a.stage3.size(); ++i) expect_same_path(a.stage3[i].path, b.stage3[i].path);
  EXPECT_THROW(mrar_from_rar(d, run_lasso(d, cfg), cfg), Error);
}

TEST(Estimators, Deterministic) {
  const Dataset d = scenario_data("2D", 100, 300, 15);
  EstimatorConfig cfg;
  cfg.seed = 77;
  for (Method m : {Method::IsisLasso, Method::Mrar}) {
    const EstimatorOutput a = run_method(m, d, cfg);
    const EstimatorOutput b = run_method(m, d, cfg);
    expect_same_path(a.primary_path, b.primary_path);
    ASSERT_EQ(a.stage3.size(), b.stage3.size());
    for (std::size_t i = 0; i < a.stage3.size(); ++i) expect_same_path(a.stage3[i].path, b.stage3[i].path);
  }
}

TEST(Estimators, TimingsRecorded) {
  const Dataset d = scenario_data("1A", 60, 100, 16);
  const EstimatorOutput out = run_mrar(d, EstimatorConfig{});
  ASSERT_FALSE(out.timings.empty());
  for (const auto& t : out.timings) EXPECT_GE(t.seconds, 0.0);
  EXPECT_EQ(out.timings.back().stage, "stage3");
}
