#include "rar/wlasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace rar {

void SolverConfig::validate() const {
  if (max_iters < 1) throw Error("solver: max_iters must be >= 1");
  if (!(tol > 0.0)) throw Error("solver: tol must be > 0");
  if (n_lambda < 1) throw Error("solver: n_lambda must be >= 1");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) throw Error("solver: lambda_min_ratio must be in (0, 1)");
  if (!(kkt_tol > 0.0)) throw Error("solver: kkt_tol must be > 0");
}

bool SolutionPath::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](char c) { return c != 0; });
}

double SolutionPath::max_kkt_violation() const {
  double m = 0.0;
  for (double v : kkt_violation) m = std::max(m, v);
  return m;
}

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double coordinate_slack(PenaltyKind kind, double w, double lambda, double beta, double g) {
  switch (kind) {
    case PenaltyKind::Unpenalized:
      return std::abs(g);
    case PenaltyKind::Weighted:
      if (beta == 0.0) return std::max(0.0, std::abs(g) - lambda * w);
      return std::abs(g - lambda * w * (beta > 0.0 ? 1.0 : -1.0));
    case PenaltyKind::Excluded:
      return 0.0;
  }
  return 0.0;
}

// Dataset view under a penalty profile: centered response, column means and centered
// second moments for the free (non-excluded, non-constant) columns.
struct Problem {
  const Dataset* data = nullptr;
  const PenaltyProfile* profile = nullptr;
  Index n = 0;
  Index p = 0;
  Vector mean;
  Vector v;
  double y_mean = 0.0;
  Vector yc;
  double yy = 0.0;  // ||yc||^2 / n
  IndexSet free;
};

Problem prepare(const Dataset& data, const PenaltyProfile& profile) {
  if (profile.size() != data.p()) throw Error("penalty profile length does not match the number of columns");
  profile.validate();
  Problem P;
  P.data = &data;
  P.profile = &profile;
  P.n = data.n();
  P.p = data.p();
  P.mean = Vector::Zero(P.p);
  P.v = Vector::Zero(P.p);
  const double nd = static_cast<double>(P.n);
  for (Index j = 0; j < P.p; ++j) {
    if (profile.kind(j) == PenaltyKind::Excluded) continue;
    const auto col = data.x.col(j);
    const double m = col.mean();
    const double var = (col.array() - m).square().sum() / nd;
    P.mean[j] = m;
    if (var > 1e-20 * std::max(1.0, m * m)) {
      P.v[j] = var;
      P.free.push_back(j);
    }
  }
  P.y_mean = data.y.mean();
  P.yc = data.y.array() - P.y_mean;
  P.yy = P.yc.squaredNorm() / nd;
  return P;
}

double penalty_value(const Problem& P, double lambda, const Vector& beta) {
  double pen = 0.0;
  for (Index j : P.free) {
    if (P.profile->kind(j) == PenaltyKind::Weighted) pen += P.profile->weight(j) * std::abs(beta[j]);
  }
  return lambda * pen;
}

struct SolveStatus {
  bool converged = false;
  int sweeps = 0;
  std::vector<double> trace;
};

void check_monotone(const std::vector<double>& trace) {
#ifndef NDEBUG
  for (std::size_t i = 1; i < trace.size(); ++i) {
    assert(trace[i] <= trace[i - 1] + 1e-10 * std::max(1.0, std::abs(trace[i - 1])));
  }
#else
  (void)trace;
#endif
}

bool want_trace(const SolverConfig& cfg) {
#ifndef NDEBUG
  (void)cfg;
  return true;
#else
  return cfg.trace_objective;
#endif
}

// Centered cross-products X_j'X_k/n for columns that have been active, grown on demand.
class ActiveGram {
 public:
  explicit ActiveGram(const Problem& P) : P_(P), pos_(static_cast<std::size_t>(P.p), -1) {}

  Matrix submatrix(const std::vector<Index>& cols) {
    std::vector<Index> fresh;
    for (Index j : cols) {
      if (pos_[static_cast<std::size_t>(j)] < 0) fresh.push_back(j);
    }
    if (!fresh.empty()) grow(fresh);
    std::vector<Index> at(cols.size());
    for (std::size_t a = 0; a < cols.size(); ++a) at[a] = pos_[static_cast<std::size_t>(cols[a])];
    return g_(at, at);
  }

  void ensure(const std::vector<Index>& cols) {
    std::vector<Index> fresh;
    for (Index j : cols) {
      if (pos_[static_cast<std::size_t>(j)] < 0) fresh.push_back(j);
    }
    if (!fresh.empty()) grow(fresh);
  }

  // Requires every column to have been passed to ensure().
  double at(Index i, Index j) const { return g_(pos_[static_cast<std::size_t>(i)], pos_[static_cast<std::size_t>(j)]); }

 private:
  void grow(const std::vector<Index>& fresh) {
    const Index old = size_;
    const Index total = old + static_cast<Index>(fresh.size());
    if (total > xc_.cols()) {
      const Index cap = std::max<Index>(total, 2 * xc_.cols());
      xc_.conservativeResize(P_.n, cap);
      g_.conservativeResize(cap, cap);
    }
    for (std::size_t a = 0; a < fresh.size(); ++a) {
      const Index j = fresh[a];
      xc_.col(old + static_cast<Index>(a)) = P_.data->x.col(j).array() - P_.mean[j];
      pos_[static_cast<std::size_t>(j)] = old + static_cast<Index>(a);
    }
    const Index k = total - old;
    const double nd = static_cast<double>(P_.n);
    g_.block(0, old, total, k).noalias() = xc_.leftCols(total).transpose() * xc_.middleCols(old, k) / nd;
    g_.block(old, 0, k, old) = g_.block(0, old, old, k).transpose();
    size_ = total;
  }

  const Problem& P_;
  std::vector<Index> pos_;
  Matrix xc_;
  Matrix g_;
  Index size_ = 0;
};

// Cholesky factor of G restricted to an ordered column list, kept across calls: columns are
// appended by forward substitution and removed with a rank-one update of the trailing block.
class GrowingCholesky {
 public:
  const std::vector<Index>& columns() const { return cols_; }
  Index size() const { return k_; }
  void clear() {
    cols_.clear();
    k_ = 0;
  }

  bool append(Index j, const ActiveGram& g) {
    if (k_ == l_.rows()) {
      const Index cap = std::max<Index>(16, 2 * k_);
      l_.conservativeResize(cap, cap);
    }
    Vector b(k_);
    for (Index a = 0; a < k_; ++a) b[a] = g.at(cols_[static_cast<std::size_t>(a)], j);
    if (k_ > 0) l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(b);
    const double gjj = g.at(j, j);
    const double d = gjj - b.squaredNorm();
    if (!(d > 1e-10 * gjj)) return false;
    if (k_ > 0) l_.row(k_).head(k_) = b.transpose();
    l_(k_, k_) = std::sqrt(d);
    cols_.push_back(j);
    ++k_;
    return true;
  }

  void remove(Index q) {
    const Index m = k_ - 1 - q;
    Vector x = l_.col(q).segment(q + 1, m);
    for (Index i = q + 1; i < k_; ++i) {
      l_.row(i - 1).head(q) = l_.row(i).head(q);
      l_.row(i - 1).segment(q, i - q) = l_.row(i).segment(q + 1, i - q);
    }
    // L33' L33'^T = L33 L33^T + x x^T
    for (Index i = 0; i < m; ++i) {
      const Index r = q + i;
      const double lii = l_(r, r);
      const double h = std::hypot(lii, x[i]);
      const double c = h / lii;
      const double s = x[i] / lii;
      l_(r, r) = h;
      for (Index t = i + 1; t < m; ++t) {
        const double v = (l_(q + t, r) + s * x[t]) / c;
        x[t] = c * x[t] - s * v;
        l_(q + t, r) = v;
      }
    }
    cols_.erase(cols_.begin() + q);
    --k_;
  }

  Vector solve(Vector rhs) const {
    const auto L = l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>();
    L.solveInPlace(rhs);
    L.transpose().solveInPlace(rhs);
    return rhs;
  }

 private:
  std::vector<Index> cols_;
  Matrix l_;
  Index k_ = 0;
};

// Naive coordinate descent on the residual vector with sequential strong-rule screening
// and a KKT pass over all free columns after each inner solve.
class ResidualSolver {
 public:
  ResidualSolver(const Problem& P, const SolverConfig& cfg, const Vector* warm)
      : P_(P),
        cfg_(cfg),
        beta_(Vector::Zero(P.p)),
        grad_(Vector::Zero(P.p)),
        in_set_(static_cast<std::size_t>(P.p), 0),
        gram_(P) {
    if (warm) {
      for (Index j : P_.free) beta_[j] = (*warm)[j];
    }
    refresh_residual();
    refresh_gradient();
  }

  SolveStatus solve(double lambda, double lambda_prev) {
    SolveStatus st;
    const PenaltyProfile& prof = *P_.profile;
    set_.clear();
    std::fill(in_set_.begin(), in_set_.end(), 0);
    const double cutoff = lambda_prev > 0.0 ? 2.0 * lambda - lambda_prev : lambda;
    for (Index j : P_.free) {
      const PenaltyKind kind = prof.kind(j);
      const bool keep = kind == PenaltyKind::Unpenalized || beta_[j] != 0.0 ||
                        std::abs(grad_[j]) >= prof.weight(j) * cutoff;
      if (keep) add(j);
    }
    for (;;) {
      const bool ok = coordinate_descent(set_, lambda, st);
      refresh_residual();
      refresh_gradient();
      bool added = false;
      for (Index j : P_.free) {
        if (in_set_[static_cast<std::size_t>(j)]) continue;
        if (prof.kind(j) == PenaltyKind::Weighted && std::abs(grad_[j]) > lambda * prof.weight(j)) {
          add(j);
          added = true;
        }
      }
      if (!added) {
        st.converged = ok;
        break;
      }
      if (st.sweeps >= cfg_.max_iters) {
        st.converged = false;
        break;
      }
    }
    return st;
  }

  const Vector& beta() const { return beta_; }
  const Vector& gradient() const { return grad_; }
  double rss_over_n() const { return r_.squaredNorm() / static_cast<double>(P_.n); }
  bool rank_deficient() const { return false; }

 private:
  void add(Index j) {
    in_set_[static_cast<std::size_t>(j)] = 1;
    set_.push_back(j);
  }

  void refresh_residual() {
    r_ = P_.yc;
    for (Index j : P_.free) {
      if (beta_[j] != 0.0) r_.array() -= beta_[j] * (P_.data->x.col(j).array() - P_.mean[j]);
    }
    r_sum_ = r_.sum();
  }

  void refresh_gradient() {
    const double nd = static_cast<double>(P_.n);
    if (static_cast<Index>(P_.free.size()) == P_.p) {
      grad_.noalias() = P_.data->x.transpose() * r_;
      grad_ = (grad_.array() - P_.mean.array() * r_sum_) / nd;
    } else {
      for (Index j : P_.free) grad_[j] = (P_.data->x.col(j).dot(r_) - P_.mean[j] * r_sum_) / nd;
    }
  }

  double sweep(const std::vector<Index>& cols, double lambda) {
    const PenaltyProfile& prof = *P_.profile;
    const double nd = static_cast<double>(P_.n);
    double max_change = 0.0;
    for (Index j : cols) {
      const auto col = P_.data->x.col(j);
      const double m = P_.mean[j];
      const double g = (col.dot(r_) - m * r_sum_) / nd;
      const double vj = P_.v[j];
      const double z = g + vj * beta_[j];
      const double t = prof.kind(j) == PenaltyKind::Weighted ? lambda * prof.weight(j) : 0.0;
      const double updated = soft_threshold(z, t) / vj;
      const double delta = updated - beta_[j];
      if (delta != 0.0) {
        r_.array() -= delta * (col.array() - m);
        beta_[j] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    r_sum_ = r_.sum();
    return max_change;
  }

  double objective_now(double lambda) const { return 0.5 * rss_over_n() + penalty_value(P_, lambda, beta_); }

  // Moves toward the solution of the stationarity equations on the current nonzero set with
  // the signs held fixed. Rejected if the objective would increase, so the iterate stays a
  // descent point and the next sweep decides convergence.
  bool polish(const std::vector<Index>& active, double lambda) {
    // A partial step drops coordinates from the set; retry a few times on the smaller set.
    for (int attempt = 0; attempt < 8; ++attempt) {
      const int r = polish_once(active, lambda);
      if (r != kPartial) return r == kFull;
    }
    return true;
  }

  static constexpr int kRejected = 0;
  static constexpr int kFull = 1;
  static constexpr int kPartial = 2;

  int polish_once(const std::vector<Index>& active, double lambda) {
    std::vector<Index> cols;
    for (Index j : active) {
      if (beta_[j] != 0.0 || P_.profile->kind(j) == PenaltyKind::Unpenalized) cols.push_back(j);
    }
    const Index k = static_cast<Index>(cols.size());
    if (k == 0 || k >= P_.n) return kRejected;
    if (!sync_factor(cols)) return kRejected;
    cols = chol_.columns();
    const double nd = static_cast<double>(P_.n);
    Vector rhs(k);
    for (Index a = 0; a < k; ++a) {
      const Index j = cols[static_cast<std::size_t>(a)];
      const double gj = (P_.data->x.col(j).dot(r_) - P_.mean[j] * r_sum_) / nd;
      double shift = 0.0;
      if (P_.profile->kind(j) == PenaltyKind::Weighted) shift = lambda * P_.profile->weight(j) * (beta_[j] > 0.0 ? 1.0 : -1.0);
      rhs[a] = gj - shift;
    }
    const Vector step = chol_.solve(std::move(rhs));
    // Along the step the objective is a convex quadratic decreasing up to t = 1; stop at the
    // first sign change and zero the coordinates that reach it.
    double t = 1.0;
    for (Index a = 0; a < k; ++a) {
      const Index j = cols[static_cast<std::size_t>(a)];
      if (P_.profile->kind(j) != PenaltyKind::Weighted) continue;
      const double v = beta_[j] + step[a];
      if (v == 0.0 || (v > 0.0) != (beta_[j] > 0.0)) t = std::min(t, beta_[j] / (beta_[j] - v));
    }
    Vector trial = beta_;
    for (Index a = 0; a < k; ++a) {
      const Index j = cols[static_cast<std::size_t>(a)];
      double v = beta_[j] + t * step[a];
      if (P_.profile->kind(j) == PenaltyKind::Weighted && (v == 0.0 || (v > 0.0) != (beta_[j] > 0.0) ||
                                                           (t < 1.0 && std::abs(v) <= 1e-12 * std::abs(beta_[j])))) {
        v = 0.0;
      }
      trial[j] = v;
    }
    const double before = objective_now(lambda);
    const Vector saved = beta_;
    beta_ = trial;
    refresh_residual();
    if (objective_now(lambda) <= before) return t < 1.0 ? kPartial : kFull;
    beta_ = saved;
    refresh_residual();
    return kRejected;
  }

  // Brings the factor to the column set `cols` (in any order).
  bool sync_factor(const std::vector<Index>& cols) {
    std::vector<char> want(static_cast<std::size_t>(P_.p), 0);
    for (Index j : cols) want[static_cast<std::size_t>(j)] = 1;
    const auto& have = chol_.columns();
    Index drop = 0;
    for (Index j : have) drop += want[static_cast<std::size_t>(j)] ? 0 : 1;
    // Many removals cost more than a fresh factorization.
    if (4 * drop > chol_.size()) chol_.clear();
    for (Index a = chol_.size() - 1; a >= 0; --a) {
      if (!want[static_cast<std::size_t>(chol_.columns()[static_cast<std::size_t>(a)])]) chol_.remove(a);
    }
    gram_.ensure(cols);
    std::vector<char> in(static_cast<std::size_t>(P_.p), 0);
    for (Index j : chol_.columns()) in[static_cast<std::size_t>(j)] = 1;
    for (Index j : cols) {
      if (in[static_cast<std::size_t>(j)]) continue;
      if (!chol_.append(j, gram_)) {
        chol_.clear();
        return false;
      }
    }
    return true;
  }

  bool coordinate_descent(const std::vector<Index>& cols, double lambda, SolveStatus& st) {
    const bool tracing = want_trace(cfg_);
    std::vector<Index> active;
    while (st.sweeps < cfg_.max_iters) {
      const double change = sweep(cols, lambda);
      ++st.sweeps;
      if (tracing) st.trace.push_back(objective_now(lambda));
      if (change < cfg_.tol) {
        check_monotone(st.trace);
        return true;
      }
      active.clear();
      for (Index j : cols) {
        if (beta_[j] != 0.0 || P_.profile->kind(j) == PenaltyKind::Unpenalized) active.push_back(j);
      }
      int since = 0;
      int wait = kPolishAfter;
      while (st.sweeps < cfg_.max_iters) {
        const double c = sweep(active, lambda);
        ++st.sweeps;
        if (tracing) st.trace.push_back(objective_now(lambda));
        if (c < cfg_.tol) break;
        if (cfg_.newton_polish && ++since >= wait) {
          since = 0;
          if (!polish(active, lambda)) wait *= 2;
        }
      }
    }
    check_monotone(st.trace);
    return false;
  }

  static constexpr int kPolishAfter = 5;

  const Problem& P_;
  const SolverConfig& cfg_;
  Vector beta_;
  Vector r_;
  double r_sum_ = 0.0;
  Vector grad_;
  std::vector<Index> set_;
  std::vector<char> in_set_;
  GrowingCholesky chol_;
  ActiveGram gram_;
};

// Covariance-update coordinate descent on the free columns. The Unpenalized block is
// eliminated exactly: beta_U = G_UU^+ (c_U - G_UW beta_W), leaving a lasso in beta_W with
// Schur-complement Hessian H and linear term h.
class GramSolver {
 public:
  GramSolver(const Problem& P, const SolverConfig& cfg, const Vector* warm, const GramCache* cache = nullptr)
      : P_(P), cfg_(cfg) {
    const Index k = static_cast<Index>(P_.free.size());
    if (cache) {
      std::vector<Index> pos(static_cast<std::size_t>(k));
      for (Index a = 0; a < k; ++a) {
        pos[static_cast<std::size_t>(a)] = cache->position(P_.free[static_cast<std::size_t>(a)]);
        if (pos[static_cast<std::size_t>(a)] < 0) throw Error("fit_path: free column missing from the Gram cache");
      }
      gram_ = cache->gram()(pos, pos);
      c_ = cache->cross()(pos);
    } else {
      const double nd = static_cast<double>(P_.n);
      Matrix xc(P_.n, k);
      for (Index a = 0; a < k; ++a) {
        const Index j = P_.free[static_cast<std::size_t>(a)];
        xc.col(a) = P_.data->x.col(j).array() - P_.mean[j];
      }
      gram_.resize(k, k);
      gram_.setZero();
      gram_.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose(), 1.0 / nd);
      gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
      c_ = xc.transpose() * P_.yc / nd;
    }

    for (Index a = 0; a < k; ++a) {
      const Index j = P_.free[static_cast<std::size_t>(a)];
      if (P_.profile->kind(j) == PenaltyKind::Unpenalized) {
        upos_.push_back(a);
      } else {
        wpos_.push_back(a);
      }
    }
    const Index nu = static_cast<Index>(upos_.size());
    const Index nw = static_cast<Index>(wpos_.size());
    Matrix gww = gram_(wpos_, wpos_);
    Vector cw = c_(wpos_);
    if (nu > 0) {
      const Matrix guu = gram_(upos_, upos_);
      const Matrix guw = gram_(upos_, wpos_);
      const Vector cu = c_(upos_);
      Eigen::LLT<Matrix> llt(guu);
      bool ok = llt.info() == Eigen::Success;
      if (ok) {
        const double dmax = guu.diagonal().maxCoeff();
        const double lmin = llt.matrixLLT().diagonal().minCoeff();
        ok = lmin * lmin > 1e-10 * dmax;
      }
      if (ok) {
        elim_ = llt.solve(guw);
        base_u_ = llt.solve(cu);
      } else {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(guu);
        cod.setThreshold(1e-10);
        rank_deficient_ = cod.rank() < nu;
        elim_ = cod.solve(guw);
        base_u_ = cod.solve(cu);
      }
      hess_ = gww - guw.transpose() * elim_;
      lin_ = cw - guw.transpose() * base_u_;
    } else {
      elim_.resize(0, nw);
      base_u_.resize(0);
      hess_ = std::move(gww);
      lin_ = std::move(cw);
    }
    weights_.resize(nw);
    fixed_zero_.assign(static_cast<std::size_t>(nw), 0);
    for (Index b = 0; b < nw; ++b) {
      const Index a = wpos_[static_cast<std::size_t>(b)];
      weights_[b] = P_.profile->weight(P_.free[static_cast<std::size_t>(a)]);
      // Column (numerically) inside the span of the Unpenalized block.
      if (!(hess_(b, b) > 1e-10 * gram_(a, a))) fixed_zero_[static_cast<std::size_t>(b)] = 1;
    }
    bw_ = Vector::Zero(nw);
    if (warm) {
      for (Index b = 0; b < nw; ++b) {
        if (!fixed_zero_[static_cast<std::size_t>(b)]) bw_[b] = (*warm)[P_.free[static_cast<std::size_t>(wpos_[static_cast<std::size_t>(b)])]];
      }
    }
    wgrad_ = lin_ - hess_ * bw_;
  }

  SolveStatus solve(double lambda, double /*lambda_prev*/) {
    SolveStatus st;
    const Index nw = bw_.size();
    if (nw == 0) {
      st.converged = true;
      return st;
    }
    const bool tracing = want_trace(cfg_);
    std::vector<Index> all(static_cast<std::size_t>(nw));
    for (Index b = 0; b < nw; ++b) all[static_cast<std::size_t>(b)] = b;
    std::vector<Index> active;
    bool ok = false;
    while (st.sweeps < cfg_.max_iters && !ok) {
      const double change = sweep(all, lambda);
      ++st.sweeps;
      if (tracing) st.trace.push_back(reduced_objective(lambda));
      if (change < cfg_.tol) {
        ok = true;
        break;
      }
      active.clear();
      for (Index b = 0; b < nw; ++b) {
        if (bw_[b] != 0.0) active.push_back(b);
      }
      while (st.sweeps < cfg_.max_iters) {
        const double c = sweep(active, lambda);
        ++st.sweeps;
        if (tracing) st.trace.push_back(reduced_objective(lambda));
        if (c < cfg_.tol) break;
      }
    }
    // Refresh the gradient to shed accumulated update error.
    wgrad_ = lin_ - hess_ * bw_;
    check_monotone(st.trace);
    st.converged = ok;
    return st;
  }

  Vector beta() const {
    Vector out = Vector::Zero(P_.p);
    const Vector bf = free_beta();
    for (std::size_t a = 0; a < P_.free.size(); ++a) out[P_.free[a]] = bf[static_cast<Index>(a)];
    return out;
  }

  // Gradient X_j' r / n for the free columns, indexed by column.
  Vector gradient() const {
    const Vector bf = free_beta();
    const Vector gf = c_ - gram_ * bf;
    Vector out = Vector::Zero(P_.p);
    for (std::size_t a = 0; a < P_.free.size(); ++a) out[P_.free[a]] = gf[static_cast<Index>(a)];
    return out;
  }

  double rss_over_n() const {
    const Vector bf = free_beta();
    return std::max(0.0, P_.yy - 2.0 * c_.dot(bf) + bf.dot(gram_ * bf));
  }

  bool rank_deficient() const { return rank_deficient_; }

  /// Smallest lambda with beta_W = 0: max |h_j| / w_j.
  double lambda_max() const {
    double m = 0.0;
    for (Index b = 0; b < lin_.size(); ++b) {
      if (!fixed_zero_[static_cast<std::size_t>(b)]) m = std::max(m, std::abs(lin_[b]) / weights_[b]);
    }
    return m;
  }

 private:
  Vector free_beta() const {
    Vector bf = Vector::Zero(static_cast<Index>(P_.free.size()));
    bf(wpos_) = bw_;
    if (!upos_.empty()) bf(upos_) = base_u_ - elim_ * bw_;
    return bf;
  }

  double reduced_objective(double lambda) const {
    // 0.5 b'Hb - h'b + lambda sum w|b|, equal to the full objective minus a constant.
    return 0.5 * bw_.dot(hess_ * bw_) - lin_.dot(bw_) + lambda * weights_.dot(bw_.cwiseAbs());
  }

  double sweep(const std::vector<Index>& cols, double lambda) {
    double max_change = 0.0;
    for (Index b : cols) {
      if (fixed_zero_[static_cast<std::size_t>(b)]) continue;
      const double hbb = hess_(b, b);
      const double z = wgrad_[b] + hbb * bw_[b];
      const double updated = soft_threshold(z, lambda * weights_[b]) / hbb;
      const double delta = updated - bw_[b];
      if (delta != 0.0) {
        wgrad_.noalias() -= delta * hess_.col(b);
        bw_[b] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    return max_change;
  }

  const Problem& P_;
  const SolverConfig& cfg_;
  Matrix gram_;
  Vector c_;
  std::vector<Index> upos_;
  std::vector<Index> wpos_;
  Matrix elim_;
  Vector base_u_;
  Matrix hess_;
  Vector lin_;
  Vector weights_;
  std::vector<char> fixed_zero_;
  Vector bw_;
  Vector wgrad_;
  bool rank_deficient_ = false;
};

bool use_gram(const Problem& P, const SolverConfig& cfg) {
  switch (cfg.engine) {
    case SolverEngine::Gram:
      return true;
    case SolverEngine::Residual:
      return false;
    case SolverEngine::Auto:
      break;
  }
  return static_cast<Index>(P.free.size()) <= cfg.gram_max_features;
}

double kkt_slack_from_gradient(const Problem& P, double lambda, const Vector& beta, const Vector& grad) {
  double worst = 0.0;
  for (Index j : P.free) {
    worst = std::max(worst, coordinate_slack(P.profile->kind(j), P.profile->weight(j), lambda, beta[j], grad[j]));
  }
  return worst;
}

double intercept_for(const Problem& P, const Vector& beta) {
  return P.y_mean - P.mean.dot(beta);
}

template <class Solver>
SolutionPath run_path(Solver& solver, const Problem& P, const std::vector<double>& lambdas, const SolverConfig& cfg,
                      bool allow_early_stop) {
  SolutionPath path;
  path.kkt_tol = cfg.kkt_tol;
  path.rank_deficient = solver.rank_deficient();
  double prev_ratio = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double lambda = lambdas[k];
    const SolveStatus st = solver.solve(lambda, k > 0 ? lambdas[k - 1] : -1.0);
    const Vector beta = solver.beta();
    const Vector grad = solver.gradient();
    path.lambdas.push_back(lambda);
    path.intercepts.push_back(intercept_for(P, beta));
    path.betas.emplace_back(beta);
    path.converged.push_back(st.converged ? 1 : 0);
    path.sweeps.push_back(st.sweeps);
    path.kkt_violation.push_back(kkt_slack_from_gradient(P, lambda, beta, grad));

    if (allow_early_stop && cfg.early_stop && P.yy > 0.0) {
      const double ratio = 1.0 - solver.rss_over_n() / P.yy;
      if (k >= 4 && (ratio > cfg.dev_ratio_max || ratio - prev_ratio < cfg.dev_change_min * ratio)) break;
      prev_ratio = ratio;
    }
  }
  return path;
}

std::vector<double> geometric_grid(double lmax, const SolverConfig& cfg) {
  if (!(lmax > 0.0)) return {0.0};
  const int m = cfg.n_lambda;
  std::vector<double> grid(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double frac = m == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(m - 1);
    grid[static_cast<std::size_t>(k)] = lmax * std::pow(cfg.lambda_min_ratio, frac);
  }
  grid.front() = lmax;
  return grid;
}

// Generated-grid path on the Gram engine; the grid comes from the reduced problem.
SolutionPath gram_path(const Problem& P, const SolverConfig& cfg, const GramCache* cache) {
  if (!P.profile->has_weighted()) throw Error("fit_path: no Weighted features");
  GramSolver solver(P, cfg, nullptr, cache);
  return run_path(solver, P, geometric_grid(solver.lambda_max(), cfg), cfg, true);
}

SolutionPath path_on_grid(const Problem& P, const std::vector<double>& lambdas, const SolverConfig& cfg,
                          bool allow_early_stop) {
  if (use_gram(P, cfg)) {
    GramSolver solver(P, cfg, nullptr);
    return run_path(solver, P, lambdas, cfg, allow_early_stop);
  }
  ResidualSolver solver(P, cfg, nullptr);
  return run_path(solver, P, lambdas, cfg, allow_early_stop);
}

void check_grid(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw Error("lambda grid is empty");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] >= 0.0) || !std::isfinite(lambdas[k])) throw Error("lambda values must be finite and >= 0");
    if (k > 0 && !(lambdas[k] < lambdas[k - 1])) throw Error("lambda grid must be strictly decreasing");
  }
}

}  // namespace

LambdaGrid lambda_grid(const Dataset& data, const PenaltyProfile& profile, const SolverConfig& config) {
  config.validate();
  const Problem P = prepare(data, profile);
  if (!profile.has_weighted()) throw Error("lambda_grid: no Weighted features");
  const double nd = static_cast<double>(P.n);

  IndexSet unpen;
  for (Index j : P.free) {
    if (profile.kind(j) == PenaltyKind::Unpenalized) unpen.push_back(j);
  }
  LambdaGrid grid;
  Vector r0 = P.yc;
  if (!unpen.empty()) {
    Matrix xu(P.n, static_cast<Index>(unpen.size()));
    for (std::size_t a = 0; a < unpen.size(); ++a) {
      xu.col(static_cast<Index>(a)) = data.x.col(unpen[a]).array() - P.mean[unpen[a]];
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xu);
    cod.setThreshold(1e-10);
    grid.rank_deficient = cod.rank() < static_cast<Index>(unpen.size());
    const Vector coef = cod.solve(P.yc);
    r0 -= xu * coef;
  }
  const double r0_sum = r0.sum();
  double lmax = 0.0;
  for (Index j : P.free) {
    if (profile.kind(j) != PenaltyKind::Weighted) continue;
    const double g = (data.x.col(j).dot(r0) - P.mean[j] * r0_sum) / nd;
    lmax = std::max(lmax, std::abs(g) / profile.weight(j));
  }
  grid.lambda_max = lmax;
  grid.lambdas = geometric_grid(lmax, config);
  return grid;
}

FitResult fit(const Dataset& data, const PenaltyProfile& profile, double lambda,
              const std::optional<CoefficientVector>& warm, const SolverConfig& config) {
  config.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("fit: lambda must be finite and >= 0");
  const Problem P = prepare(data, profile);
  if (warm && warm->size() != data.p()) throw Error("fit: warm start has the wrong length");
  const Vector* w = warm ? &warm->values() : nullptr;

  FitResult out;
  auto finish = [&](auto& solver) {
    SolveStatus st = solver.solve(lambda, -1.0);
    const Vector beta = solver.beta();
    out.intercept = intercept_for(P, beta);
    out.kkt_violation = kkt_slack_from_gradient(P, lambda, beta, solver.gradient());
    out.beta = CoefficientVector(beta);
    out.converged = st.converged;
    out.sweeps = st.sweeps;
    out.rank_deficient = solver.rank_deficient();
    if (config.trace_objective) out.objective_trace = std::move(st.trace);
  };
  if (use_gram(P, config)) {
    GramSolver solver(P, config, w);
    finish(solver);
  } else {
    ResidualSolver solver(P, config, w);
    finish(solver);
  }
  return out;
}

SolutionPath fit_path(const Dataset& data, const PenaltyProfile& profile, const SolverConfig& config) {
  config.validate();
  const Problem P = prepare(data, profile);
  if (use_gram(P, config)) return gram_path(P, config, nullptr);
  const LambdaGrid grid = lambda_grid(data, profile, config);
  SolutionPath path = path_on_grid(P, grid.lambdas, config, true);
  path.rank_deficient = path.rank_deficient || grid.rank_deficient;
  return path;
}

SolutionPath fit_path(const Dataset& data, const PenaltyProfile& profile, const std::vector<double>& lambdas,
                      const SolverConfig& config) {
  config.validate();
  check_grid(lambdas);
  const Problem P = prepare(data, profile);
  return path_on_grid(P, lambdas, config, false);
}

SolutionPath fit_path(const GramCache& cache, const PenaltyProfile& profile, const SolverConfig& config) {
  config.validate();
  const Problem P = prepare(cache.data(), profile);
  return gram_path(P, config, &cache);
}

GramCache::GramCache(const Dataset& data, IndexSet columns) : data_(&data), columns_(make_index_set(std::move(columns))) {
  const Index k = static_cast<Index>(columns_.size());
  const Index n = data.n();
  const double nd = static_cast<double>(n);
  Matrix xc(n, k);
  for (Index a = 0; a < k; ++a) {
    const Index j = columns_[static_cast<std::size_t>(a)];
    if (j < 0 || j >= data.p()) throw Error("GramCache: column index out of range");
    xc.col(a) = data.x.col(j).array() - data.x.col(j).mean();
  }
  gram_.setZero(k, k);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose(), 1.0 / nd);
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  const Vector yc = data.y.array() - data.y.mean();
  cross_ = xc.transpose() * yc / nd;
}

Index GramCache::position(Index j) const {
  auto it = std::lower_bound(columns_.begin(), columns_.end(), j);
  if (it == columns_.end() || *it != j) return -1;
  return static_cast<Index>(it - columns_.begin());
}

KktReport kkt_check(const Dataset& data, const PenaltyProfile& profile, double lambda, const CoefficientVector& beta,
                    double tol) {
  if (profile.size() != data.p() || beta.size() != data.p()) throw Error("kkt_check: dimension mismatch");
  const Index n = data.n();
  const Index p = data.p();
  const double nd = static_cast<double>(n);
  const Vector means = column_means(data.x);
  // Profiling out the intercept is the same as centering x and y.
  Vector r = data.y.array() - data.y.mean();
  for (Index j : beta.support()) r.array() -= beta[j] * (data.x.col(j).array() - means[j]);

  KktReport rep;
  rep.violated.assign(static_cast<std::size_t>(p), 0);
  const double r_sum = r.sum();
  for (Index j = 0; j < p; ++j) {
    const PenaltyKind kind = profile.kind(j);
    if (kind == PenaltyKind::Excluded) continue;
    const double g = (data.x.col(j).dot(r) - means[j] * r_sum) / nd;
    const double slack = coordinate_slack(kind, profile.weight(j), lambda, beta[j], g);
    rep.max_violation = std::max(rep.max_violation, slack);
    if (slack > tol) {
      rep.violated[static_cast<std::size_t>(j)] = 1;
      rep.passed = false;
    }
  }
  return rep;
}

std::vector<KktReport> kkt_check_path(const Dataset& data, const PenaltyProfile& profile, const SolutionPath& path,
                                      double tol) {
  if (profile.size() != data.p()) throw Error("kkt_check: dimension mismatch");
  const Index n = data.n();
  const Index p = data.p();
  const double nd = static_cast<double>(n);
  const Vector means = column_means(data.x);
  const Vector yc = data.y.array() - data.y.mean();
  // Excluded coordinates carry no condition, so only the other columns need gradients.
  std::vector<Index> checked;
  for (Index j = 0; j < p; ++j) {
    if (profile.kind(j) != PenaltyKind::Excluded) checked.push_back(j);
  }
  const Index c = static_cast<Index>(checked.size());
  const bool all = c == p;
  Matrix xc;
  if (!all) {
    xc.resize(n, c);
    for (Index a = 0; a < c; ++a) xc.col(a) = data.x.col(checked[static_cast<std::size_t>(a)]);
  }
  constexpr Index kBlock = 32;
  std::vector<KktReport> out(path.betas.size());
  for (std::size_t k0 = 0; k0 < path.betas.size(); k0 += kBlock) {
    const Index width = std::min<Index>(kBlock, static_cast<Index>(path.betas.size() - k0));
    Matrix r(n, width);
    for (Index b = 0; b < width; ++b) {
      const CoefficientVector& beta = path.betas[k0 + static_cast<std::size_t>(b)];
      if (beta.size() != p) throw Error("kkt_check: dimension mismatch");
      r.col(b) = yc;
      for (Index j : beta.support()) r.col(b).array() -= beta[j] * (data.x.col(j).array() - means[j]);
    }
    const Matrix g = all ? Matrix(data.x.transpose() * r) : Matrix(xc.transpose() * r);
    const Eigen::RowVectorXd r_sum = r.colwise().sum();
    for (Index b = 0; b < width; ++b) {
      const std::size_t k = k0 + static_cast<std::size_t>(b);
      const CoefficientVector& beta = path.betas[k];
      KktReport& rep = out[k];
      rep.violated.assign(static_cast<std::size_t>(p), 0);
      for (Index a = 0; a < c; ++a) {
        const Index j = checked[static_cast<std::size_t>(a)];
        const double gj = (g(a, b) - means[j] * r_sum[b]) / nd;
        const double slack = coordinate_slack(profile.kind(j), profile.weight(j), path.lambdas[k], beta[j], gj);
        rep.max_violation = std::max(rep.max_violation, slack);
        if (slack > tol) {
          rep.violated[static_cast<std::size_t>(j)] = 1;
          rep.passed = false;
        }
      }
    }
  }
  return out;
}

OlsResult constrained_ols(const Dataset& data, const IndexSet& support) {
  const Index n = data.n();
  OlsResult out;
  const double y_mean = data.y.mean();
  if (support.empty()) {
    out.beta = CoefficientVector::zeros(data.p());
    out.intercept = y_mean;
    return out;
  }
  if (static_cast<Index>(support.size()) > n) out.rank_deficient = true;
  Matrix xs(n, static_cast<Index>(support.size()));
  Vector means(static_cast<Index>(support.size()));
  for (std::size_t a = 0; a < support.size(); ++a) {
    const Index j = support[a];
    if (j < 0 || j >= data.p()) throw Error("constrained_ols: support index out of range");
    means[static_cast<Index>(a)] = data.x.col(j).mean();
    xs.col(static_cast<Index>(a)) = data.x.col(j).array() - means[static_cast<Index>(a)];
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xs);
  cod.setThreshold(1e-10);
  if (cod.rank() < static_cast<Index>(support.size())) out.rank_deficient = true;
  const Vector yc = data.y.array() - y_mean;
  const Vector coef = cod.solve(yc);
  Vector beta = Vector::Zero(data.p());
  for (std::size_t a = 0; a < support.size(); ++a) beta[support[a]] = coef[static_cast<Index>(a)];
  out.intercept = y_mean - means.dot(coef);
  out.beta = CoefficientVector(std::move(beta));
  return out;
}

double residual_sum_squares(const Dataset& data, const CoefficientVector& beta, double intercept) {
  if (beta.size() != data.p()) throw Error("residual_sum_squares: dimension mismatch");
  Vector r = data.y.array() - intercept;
  for (Index j : beta.support()) r -= beta[j] * data.x.col(j);
  return r.squaredNorm();
}

double objective(const Dataset& data, const PenaltyProfile& profile, double lambda, const CoefficientVector& beta,
                 double intercept) {
  if (profile.size() != data.p()) throw Error("objective: dimension mismatch");
  double pen = 0.0;
  for (Index j : beta.support()) {
    switch (profile.kind(j)) {
      case PenaltyKind::Weighted:
        pen += profile.weight(j) * std::abs(beta[j]);
        break;
      case PenaltyKind::Unpenalized:
        break;
      case PenaltyKind::Excluded:
        return std::numeric_limits<double>::infinity();
    }
  }
  return residual_sum_squares(data, beta, intercept) / (2.0 * static_cast<double>(data.n())) + lambda * pen;
}

}  // namespace rar
