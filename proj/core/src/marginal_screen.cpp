#include "rar/marginal_screen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rar/rng.hpp"
#include "rar/tuning.hpp"

namespace rar {
namespace {

struct CenteredColumns {
  Vector mean;
  Vector ss;  // sum of squared deviations
  std::vector<char> constant;
};

CenteredColumns column_moments(const Matrix& x) {
  const Index p = x.cols();
  CenteredColumns c;
  c.mean = x.colwise().mean().transpose();
  c.ss.resize(p);
  c.constant.assign(static_cast<std::size_t>(p), 0);
  for (Index j = 0; j < p; ++j) {
    c.ss[j] = (x.col(j).array() - c.mean[j]).square().sum();
    const double scale = std::max(1.0, c.mean[j] * c.mean[j]) * static_cast<double>(x.rows());
    if (!(c.ss[j] > 1e-20 * scale)) c.constant[static_cast<std::size_t>(j)] = 1;
  }
  return c;
}

std::vector<Index> rank_by_abs(const Vector& coef) {
  std::vector<Index> order(static_cast<std::size_t>(coef.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(coef[a]) > std::abs(coef[b]); });
  return order;
}

}  // namespace

MarginalStats marginal_coefficients(const Matrix& x, const Vector& y) {
  if (x.rows() < 2) throw Error("marginal_coefficients: need n >= 2");
  if (y.size() != x.rows()) throw Error("marginal_coefficients: response length mismatch");
  const CenteredColumns c = column_moments(x);
  const double y_sum = y.sum();
  MarginalStats st;
  st.coef = x.transpose() * y;
  bool any = false;
  for (Index j = 0; j < x.cols(); ++j) {
    if (c.constant[static_cast<std::size_t>(j)]) {
      st.coef[j] = 0.0;
      st.constant_columns.push_back(j);
    } else {
      st.coef[j] = (st.coef[j] - c.mean[j] * y_sum) / c.ss[j];
      any = true;
    }
  }
  if (!any) throw Error("marginal_coefficients: every column is constant");
  st.abs_rank = rank_by_abs(st.coef);
  return st;
}

MarginalStats marginal_coefficients(const Dataset& data) {
  return marginal_coefficients(data.x, data.y);
}

IndexSet sis_select(const MarginalStats& stats, Index d) {
  const Index p = stats.coef.size();
  if (d < 1 || d > p) throw Error("sis_select: d must be in [1, p]");
  IndexSet out(stats.abs_rank.begin(), stats.abs_rank.begin() + d);
  std::sort(out.begin(), out.end());
  return out;
}

Index default_screen_size(Index n) {
  const auto d = static_cast<Index>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n))));
  return std::max<Index>(1, d);
}

IsisResult isis_select(const Dataset& data, const IsisOptions& options) {
  if (options.iterations < 1) throw Error("isis_select: iterations must be >= 1");
  const Index p = data.p();
  const Index d = std::min(p, options.d > 0 ? options.d : default_screen_size(data.n()));
  const Index per_iter = options.per_iter > 0 ? options.per_iter : (d + 2) / 3;

  IsisResult res;
  std::vector<char> taken(static_cast<std::size_t>(p), 0);
  const MarginalStats first = marginal_coefficients(data);
  IndexSet added;
  for (Index j : first.abs_rank) {
    if (static_cast<Index>(added.size()) >= per_iter) break;
    added.push_back(j);
  }
  for (Index j : added) {
    taken[static_cast<std::size_t>(j)] = 1;
    res.order.push_back(j);
  }
  res.added.push_back(make_index_set(added));

  for (int it = 1; it < options.iterations && static_cast<Index>(res.order.size()) < d; ++it) {
    PenaltyProfile prof = PenaltyProfile::all_excluded(p);
    for (Index j : res.order) prof.set_weighted(j, 1.0);
    const SolutionPath path = fit_path(data, prof, options.solver);
    const Index k = gic_select(data, path, options.gic_multiplier).index;
    Vector r = data.y.array() - path.intercepts[static_cast<std::size_t>(k)];
    const CoefficientVector& b = path.betas[static_cast<std::size_t>(k)];
    for (Index j : b.support()) r -= b[j] * data.x.col(j);

    const MarginalStats st = marginal_coefficients(data.x, r);
    added.clear();
    for (Index j : st.abs_rank) {
      if (static_cast<Index>(added.size()) >= per_iter) break;
      if (taken[static_cast<std::size_t>(j)]) continue;
      if (st.coef[j] == 0.0) break;  // nothing left to screen
      added.push_back(j);
    }
    if (added.empty()) break;
    for (Index j : added) {
      taken[static_cast<std::size_t>(j)] = 1;
      res.order.push_back(j);
    }
    res.added.push_back(make_index_set(added));
  }
  if (static_cast<Index>(res.order.size()) > d) res.order.resize(static_cast<std::size_t>(d));
  res.selected = make_index_set(res.order);
  return res;
}

std::vector<double> permutation_maxima(const Dataset& data, int m, std::uint64_t seed) {
  if (m < 1) throw Error("permutation_threshold: m must be >= 1");
  const Index n = data.n();
  const CenteredColumns c = column_moments(data.x);
  // Fixed-width blocks keep each permutation's dot products on one GEMM code path, so the
  // first k maxima do not depend on m.
  constexpr int kBlock = 8;
  const double y_sum = data.y.sum();
  std::vector<double> maxima(static_cast<std::size_t>(m), 0.0);
  Matrix yp(n, kBlock);
  for (int k0 = 0; k0 < m; k0 += kBlock) {
    yp.setZero();
    const int width = std::min(kBlock, m - k0);
    for (int b = 0; b < width; ++b) {
      Rng rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(k0 + b)}));
      const auto perm = random_permutation(n, rng);
      for (Index i = 0; i < n; ++i) yp(i, b) = data.y[perm[static_cast<std::size_t>(i)]];
    }
    const Matrix dots = data.x.transpose() * yp;
    for (int b = 0; b < width; ++b) {
      double best = 0.0;
      for (Index j = 0; j < data.p(); ++j) {
        if (c.constant[static_cast<std::size_t>(j)]) continue;
        best = std::max(best, std::abs((dots(j, b) - c.mean[j] * y_sum) / c.ss[j]));
      }
      maxima[static_cast<std::size_t>(k0 + b)] = best;
    }
  }
  return maxima;
}

double permutation_threshold(const Dataset& data, int m, std::uint64_t seed) {
  const auto maxima = permutation_maxima(data, m, seed);
  return *std::max_element(maxima.begin(), maxima.end());
}

Index retention_cap(Index n) {
  auto c = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (c * c < n) ++c;
  while (c > 0 && (c - 1) * (c - 1) >= n) --c;
  return c;
}

RetentionResult retain(const MarginalStats& stats, double gamma, Index n, bool cap) {
  if (!(gamma >= 0.0)) throw Error("retain: gamma must be >= 0");
  RetentionResult res;
  res.gamma = gamma;
  std::vector<Index> kept;
  for (Index j : stats.abs_rank) {
    if (std::abs(stats.coef[j]) >= gamma) kept.push_back(j);
  }
  const Index limit = retention_cap(n);
  if (cap && static_cast<Index>(kept.size()) > limit) {
    kept.resize(static_cast<std::size_t>(limit));
    res.capped = true;
  }
  res.retained = make_index_set(std::move(kept));
  return res;
}

}  // namespace rar
