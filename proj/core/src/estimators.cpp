#include "rar/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "rar/tuning.hpp"

namespace rar {
namespace {

class StageClock {
 public:
  explicit StageClock(EstimatorOutput& out) : out_(out), start_(std::chrono::steady_clock::now()) {}
  void mark(const char* stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.timings.push_back({stage, std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

 private:
  EstimatorOutput& out_;
  std::chrono::steady_clock::time_point start_;
};

EstimatorOutput start(Method m, const Dataset& working) {
  EstimatorOutput out;
  out.method = m;
  out.standardized = working.standardized;
  out.center = working.column_means;
  out.scale = working.column_scales;
  return out;
}

void fit_primary(EstimatorOutput& out, const Dataset& working, PenaltyProfile profile, const EstimatorConfig& cfg) {
  out.primary_path = fit_path(working, profile, cfg.solver);
  out.primary_profile = std::move(profile);
}

Index screen_size(const Dataset& working, const EstimatorConfig& cfg) {
  const Index d = cfg.screen_size > 0 ? cfg.screen_size : default_screen_size(working.n());
  if (d > working.p()) throw Error("screen size exceeds the number of columns");
  return d;
}

EstimatorOutput lasso_on(const Dataset& w, const EstimatorConfig& cfg) {
  EstimatorOutput out = start(Method::Lasso, w);
  StageClock clock(out);
  fit_primary(out, w, PenaltyProfile::uniform(w.p()), cfg);
  clock.mark("path");
  return out;
}

EstimatorOutput ada_on(const Dataset& w, const EstimatorConfig& cfg) {
  EstimatorOutput out = start(Method::AdaLasso, w);
  StageClock clock(out);
  const MarginalStats st = marginal_coefficients(w);
  clock.mark("marginal");
  PenaltyProfile prof = PenaltyProfile::all_excluded(w.p());
  bool any = false;
  for (Index j = 0; j < w.p(); ++j) {
    const double c = std::abs(st.coef[j]);
    if (c > 0.0) {
      prof.set_weighted(j, 1.0 / c);
      any = true;
    }
  }
  if (!any) throw Error("ada_lasso: every marginal coefficient is zero");
  fit_primary(out, w, std::move(prof), cfg);
  clock.mark("path");
  return out;
}

void fit_screened(EstimatorOutput& out, const Dataset& w, const IndexSet& selected, const EstimatorConfig& cfg) {
  PenaltyProfile prof = PenaltyProfile::all_excluded(w.p());
  for (Index j : selected) prof.set_weighted(j, 1.0);
  out.screened = selected;
  fit_primary(out, w, std::move(prof), cfg);
}

EstimatorOutput sis_on(const Dataset& w, const EstimatorConfig& cfg) {
  EstimatorOutput out = start(Method::SisLasso, w);
  StageClock clock(out);
  const IndexSet sel = sis_select(marginal_coefficients(w), screen_size(w, cfg));
  clock.mark("screen");
  fit_screened(out, w, sel, cfg);
  clock.mark("path");
  return out;
}

EstimatorOutput isis_on(const Dataset& w, const EstimatorConfig& cfg) {
  EstimatorOutput out = start(Method::IsisLasso, w);
  StageClock clock(out);
  IsisOptions opt = cfg.isis;
  opt.d = screen_size(w, cfg);
  opt.solver = cfg.solver;
  opt.gic_multiplier = cfg.gic_multiplier;
  const IsisResult sel = isis_select(w, opt);
  clock.mark("screen");
  fit_screened(out, w, sel.selected, cfg);
  clock.mark("path");
  return out;
}

EstimatorOutput rar_on(const Dataset& w, const EstimatorConfig& cfg) {
  EstimatorOutput out = start(Method::Rar, w);
  StageClock clock(out);
  const MarginalStats st = marginal_coefficients(w);
  const double gamma = cfg.gamma ? *cfg.gamma : permutation_threshold(w, cfg.permutations, cfg.seed);
  RetentionResult ret;
  if (std::isinf(gamma)) {
    ret.gamma = gamma;
  } else {
    ret = retain(st, gamma, w.n(), cfg.cap);
  }
  clock.mark("retention");
  PenaltyProfile prof = PenaltyProfile::uniform(w.p());
  for (Index j : ret.retained) prof.set_unpenalized(j);
  out.degraded = ret.retained.empty();
  out.retention = std::move(ret);
  fit_primary(out, w, std::move(prof), cfg);
  clock.mark("path");
  return out;
}

PenaltyProfile stage3_profile(Index p, const IndexSet& retained, const IndexSet& q) {
  PenaltyProfile prof = PenaltyProfile::all_excluded(p);
  for (Index j : retained) prof.set_weighted(j, 1.0);
  for (Index j : q) prof.set_unpenalized(j);
  return prof;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Lasso:
      return "lasso";
    case Method::AdaLasso:
      return "ada";
    case Method::SisLasso:
      return "sis";
    case Method::IsisLasso:
      return "isis";
    case Method::Rar:
      return "rar";
    case Method::Mrar:
      return "mrar";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  static const std::map<std::string, Method> names = {
      {"lasso", Method::Lasso}, {"ada", Method::AdaLasso},  {"ada-lasso", Method::AdaLasso},
      {"sis", Method::SisLasso}, {"sis-lasso", Method::SisLasso}, {"isis", Method::IsisLasso},
      {"isis-lasso", Method::IsisLasso}, {"rar", Method::Rar}, {"mrar", Method::Mrar}};
  auto it = names.find(name);
  if (it == names.end()) throw Error("unknown method '" + name + "'");
  return it->second;
}

Dataset working_data(const Dataset& data, const EstimatorConfig& config) {
  validate(data);
  if (config.standardize && !data.standardized) return standardize(data);
  return data;
}

std::pair<CoefficientVector, double> to_original_scale(const EstimatorOutput& out, const CoefficientVector& beta,
                                                       double intercept) {
  if (out.scale.size() != beta.size()) throw Error("to_original_scale: dimension mismatch");
  Vector b = Vector::Zero(beta.size());
  double b0 = intercept;
  for (Index j : beta.support()) {
    b[j] = beta[j] / out.scale[j];
    b0 -= b[j] * out.center[j];
  }
  return {CoefficientVector(std::move(b)), b0};
}

EstimatorOutput run_method_on_working(Method method, const Dataset& w, const EstimatorConfig& cfg) {
  switch (method) {
    case Method::Lasso:
      return lasso_on(w, cfg);
    case Method::AdaLasso:
      return ada_on(w, cfg);
    case Method::SisLasso:
      return sis_on(w, cfg);
    case Method::IsisLasso:
      return isis_on(w, cfg);
    case Method::Rar:
      return rar_on(w, cfg);
    case Method::Mrar:
      return mrar_from_rar_on_working(w, rar_on(w, cfg), cfg);
  }
  throw Error("unknown method");
}

EstimatorOutput mrar_from_rar_on_working(const Dataset& w, EstimatorOutput rar, const EstimatorConfig& cfg) {
  if (rar.method != Method::Rar || !rar.retention) throw Error("mrar: expected a RAR output");
  EstimatorOutput out = std::move(rar);
  out.method = Method::Mrar;
  StageClock clock(out);
  const IndexSet& retained = out.retention->retained;
  if (retained.empty()) {
    // Stage 3 has nothing to penalize; MRAR reports the stage-2 results.
    clock.mark("stage3");
    return out;
  }
  const SolutionPath& stage2 = out.primary_path;

  std::vector<Stage3Fit> fits;
  std::map<IndexSet, std::size_t> seen;
  auto q_at = [&](std::size_t k) { return set_difference(stage2.betas[k].support(), retained); };
  auto add_q = [&](IndexSet q, std::size_t k) {
    auto [it, inserted] = seen.try_emplace(q, fits.size());
    if (inserted) {
      Stage3Fit f;
      f.q = std::move(q);
      fits.push_back(std::move(f));
    }
    fits[it->second].stage2_indices.push_back(static_cast<Index>(k));
  };
  if (cfg.stage3 == Stage3Mode::Gic) {
    const Index k = gic_select(w, stage2, cfg.gic_multiplier).index;
    add_q(q_at(static_cast<std::size_t>(k)), static_cast<std::size_t>(k));
    out.q_set = fits.front().q;
  } else {
    for (std::size_t k = 0; k < stage2.betas.size(); ++k) add_q(q_at(k), k);
  }

  IndexSet all = retained;
  for (const auto& f : fits) all = set_union(all, f.q);
  const GramCache cache(w, all);
  SolverConfig scfg = cfg.solver;
  scfg.engine = SolverEngine::Gram;
  for (auto& f : fits) {
    f.profile = stage3_profile(w.p(), retained, f.q);
    f.path = fit_path(cache, f.profile, scfg);
  }
  out.stage3 = std::move(fits);
  clock.mark("stage3");
  return out;
}

EstimatorOutput run_method(Method method, const Dataset& data, const EstimatorConfig& config) {
  const Dataset w = working_data(data, config);
  return run_method_on_working(method, w, config);
}

EstimatorOutput run_lasso(const Dataset& data, const EstimatorConfig& config) {
  return run_method(Method::Lasso, data, config);
}
EstimatorOutput run_ada_lasso(const Dataset& data, const EstimatorConfig& config) {
  return run_method(Method::AdaLasso, data, config);
}
EstimatorOutput run_sis_lasso(const Dataset& data, const EstimatorConfig& config) {
  return run_method(Method::SisLasso, data, config);
}
EstimatorOutput run_isis_lasso(const Dataset& data, const EstimatorConfig& config) {
  return run_method(Method::IsisLasso, data, config);
}
EstimatorOutput run_rar(const Dataset& data, const EstimatorConfig& config) {
  return run_method(Method::Rar, data, config);
}
EstimatorOutput run_mrar(const Dataset& data, const EstimatorConfig& config) {
  return run_method(Method::Mrar, data, config);
}

EstimatorOutput mrar_from_rar(const Dataset& data, EstimatorOutput rar, const EstimatorConfig& config) {
  const Dataset w = working_data(data, config);
  return mrar_from_rar_on_working(w, std::move(rar), config);
}

}  // namespace rar
