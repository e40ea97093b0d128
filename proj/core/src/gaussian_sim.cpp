#include "rar/gaussian_sim.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "rar/rng.hpp"

namespace rar {

Index dimension_rule(Index n) {
  if (n < 1) throw Error("dimension_rule: n must be >= 1");
  return static_cast<Index>(std::floor(100.0 * std::exp(std::pow(static_cast<double>(n), 0.2))));
}

Index ScenarioSpec::dimension() const {
  return p ? *p : dimension_rule(n);
}

Index ScenarioSpec::block_size() const {
  return std::visit(
      [](const auto& b) -> Index {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, EquicorrelatedBlock>) {
          return b.size;
        } else {
          return b.matrix.rows();
        }
      },
      block);
}

Matrix ScenarioSpec::block_matrix() const {
  return std::visit(
      [](const auto& b) -> Matrix {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, EquicorrelatedBlock>) {
          if (b.size < 1) throw Error("equicorrelated block size must be >= 1");
          Matrix m = Matrix::Constant(b.size, b.size, b.r);
          m.diagonal().setOnes();
          return m;
        } else {
          return b.matrix;
        }
      },
      block);
}

Vector ScenarioSpec::beta() const {
  Vector out = Vector::Zero(dimension());
  out.head(beta_s.size()) = beta_s;
  return out;
}

IndexSet ScenarioSpec::support() const {
  IndexSet s;
  for (Index j = 0; j < beta_s.size(); ++j) {
    if (beta_s[j] != 0.0) s.push_back(j);
  }
  return s;
}

ScenarioSpec ScenarioSpec::with_n(Index new_n) const {
  ScenarioSpec out = *this;
  out.n = new_n;
  return out;
}

namespace {

Matrix scenario2_block(double r0, double r1, double r2, double r3, double r4) {
  Matrix m(4, 4);
  m << 1, r0, r1, r3,
       r0, 1, r2, r4,
       r1, r2, 1, 0,
       r3, r4, 0, 1;
  return m;
}

void check_spec(const ScenarioSpec& spec) {
  if (spec.n < 2) throw Error("scenario: n must be >= 2");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw Error("scenario: sigma must be finite and >= 0");
  if (spec.beta_s.size() > spec.block_size())
    throw Error("scenario: length(beta_s) exceeds the correlated block size");
  if (spec.dimension() < spec.block_size()) throw Error("scenario: p is smaller than the block size");
  if (!spec.beta_s.allFinite()) throw Error("scenario: beta_s must be finite");
  if (const auto* eq = std::get_if<EquicorrelatedBlock>(&spec.block); eq && eq->size > 1) {
    const double lower = -1.0 / static_cast<double>(eq->size - 1);
    if (!(eq->r > lower && eq->r < 1.0)) {
      std::ostringstream msg;
      msg << "scenario: equicorrelation r = " << eq->r << " outside (" << lower << ", 1)";
      throw Error(msg.str());
    }
  }
}

}  // namespace

ScenarioSpec builtin_scenario(std::string_view name, Index n) {
  ScenarioSpec s;
  s.name = std::string(name);
  s.n = n;
  if (name == "1A") {
    s.block = EquicorrelatedBlock{8, 0.6};
    s.sigma = 3.5;
    s.beta_s = (Vector(4) << 3, -2, 2, -2).finished();
  } else if (name == "1B") {
    s.block = EquicorrelatedBlock{10, 0.6};
    s.sigma = 1.2;
    s.beta_s = (Vector(5) << 1, 1, -1, 1, -1).finished();
  } else if (name == "2C") {
    s.block = ExplicitBlock{scenario2_block(0.8, -0.1, 0.1, -0.1, 0.1)};
    s.sigma = 2.5;
    s.beta_s = (Vector(2) << 2.5, -2).finished();
  } else if (name == "2D") {
    s.block = ExplicitBlock{scenario2_block(0.75, 0.2, 0.2, 0.2, -0.2)};
    s.sigma = 2.5;
    s.beta_s = (Vector(2) << 2.5, -2).finished();
  } else {
    throw Error("unknown built-in scenario '" + std::string(name) + "'");
  }
  return s;
}

std::vector<std::string> builtin_scenario_names() {
  return {"1A", "1B", "2C", "2D"};
}

BlockCovariance::BlockCovariance(Matrix block, Index p) : block_(std::move(block)), p_(p) {
  const Index m = block_.rows();
  if (m != block_.cols() || m < 1) throw Error("covariance block must be square and non-empty");
  if (p_ < m) throw Error("covariance dimension smaller than its block");
  if (!block_.allFinite()) throw Error("covariance block has non-finite entries");
  for (Index i = 0; i < m; ++i) {
    if (std::abs(block_(i, i) - 1.0) > 1e-12) throw Error("covariance block must have unit diagonal");
    for (Index j = 0; j < i; ++j) {
      if (std::abs(block_(i, j) - block_(j, i)) > 1e-12) throw Error("covariance block must be symmetric");
    }
  }
  Eigen::LLT<Matrix> llt(block_);
  if (llt.info() != Eigen::Success) throw Error("covariance block is not positive definite");
  chol_ = llt.matrixL();
  // LLT accepts some semidefinite inputs with tiny pivots; reject those too.
  if (chol_.diagonal().minCoeff() <= 1e-10) throw Error("covariance block is numerically singular");
}

double BlockCovariance::operator()(Index i, Index j) const {
  const Index m = block_size();
  if (i < m && j < m) return block_(i, j);
  return i == j ? 1.0 : 0.0;
}

Matrix BlockCovariance::submatrix(const IndexSet& rows, const IndexSet& cols) const {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      out(static_cast<Index>(a), static_cast<Index>(b)) = (*this)(rows[a], cols[b]);
    }
  }
  return out;
}

Vector BlockCovariance::times(const Vector& v) const {
  if (v.size() != p_) throw Error("covariance product: length mismatch");
  Vector out = v;
  const Index m = block_size();
  out.head(m) = block_ * v.head(m);
  return out;
}

Matrix BlockCovariance::dense() const {
  Matrix out = Matrix::Identity(p_, p_);
  out.topLeftCorner(block_size(), block_size()) = block_;
  return out;
}

BlockCovariance build_covariance(const ScenarioSpec& spec) {
  check_spec(spec);
  return BlockCovariance(spec.block_matrix(), spec.dimension());
}

Dataset sample_dataset(const ScenarioSpec& spec, std::uint64_t seed) {
  const BlockCovariance cov = build_covariance(spec);
  const Index n = spec.n;
  const Index p = cov.p();
  const Index m = cov.block_size();

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix x(n, p);
  double* data = x.data();
  for (Index k = 0; k < n * p; ++k) data[k] = normal(rng);
  // Rows of the block get covariance L L' = block.
  x.leftCols(m) = x.leftCols(m) * cov.cholesky_lower().transpose();

  Vector eps(n);
  for (Index i = 0; i < n; ++i) eps[i] = normal(rng);

  const Index s = spec.beta_s.size();
  Vector y = spec.sigma * eps;
  if (s > 0) y.noalias() += x.leftCols(s) * spec.beta_s;

  return Dataset::make(std::move(x), std::move(y), CoefficientVector(spec.beta()));
}

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

namespace {

// Rows: noises in the correlated block (tail rows of Sigma_{S^c S} are zero).
IndexSet block_noises(const ScenarioSpec& spec, const IndexSet& support) {
  IndexSet block;
  for (Index j = 0; j < spec.block_size(); ++j) block.push_back(j);
  return set_difference(block, support);
}

}  // namespace

PopulationDiagnostics population_diagnostics(const ScenarioSpec& spec, const std::optional<IndexSet>& retained) {
  const BlockCovariance cov = build_covariance(spec);
  const Index p = cov.p();
  PopulationDiagnostics d;
  d.support = spec.support();
  const IndexSet& s = d.support;

  if (retained) {
    for (Index j : *retained) {
      if (j < 0 || j >= p) throw Error("retained index out of range");
    }
  }

  const Vector beta = spec.beta();
  d.marginal_coef = cov.times(beta);
  d.signal_quadratic = beta.dot(d.marginal_coef);
  d.var_y = d.signal_quadratic + spec.sigma * spec.sigma;
  if (!(d.var_y > 0.0)) throw Error("population diagnostics: var(Y) is zero");
  d.marginal_corr = d.marginal_coef / std::sqrt(d.var_y);
  d.sigma_beta_inf = d.marginal_coef.cwiseAbs().maxCoeff();

  d.zeta = 0.0;
  std::size_t k = 0;
  for (Index j = 0; j < p; ++j) {
    if (k < s.size() && s[k] == j) {
      ++k;
      continue;
    }
    d.zeta = std::max(d.zeta, std::abs(d.marginal_coef[j]));
  }

  if (s.empty()) {
    d.min_abs_beta = 0.0;
    d.min_eig_ss = std::numeric_limits<double>::quiet_NaN();
    d.conditional_rho = 1.0;
    if (retained) d.restricted_irrep_norm = 0.0;
    return d;
  }

  d.min_abs_beta = std::numeric_limits<double>::infinity();
  for (Index j : s) d.min_abs_beta = std::min(d.min_abs_beta, std::abs(beta[j]));

  const Matrix sigma_ss = cov.submatrix(s, s);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_ss, Eigen::EigenvaluesOnly);
  d.min_eig_ss = eig.eigenvalues().minCoeff();

  const IndexSet noises = block_noises(spec, s);
  const Matrix sigma_ns = cov.submatrix(noises, s);
  const Eigen::LDLT<Matrix> ss_factor(sigma_ss);
  // coef = Sigma_{S^c S} Sigma_SS^{-1}, computed as (Sigma_SS^{-1} Sigma_{S S^c})'.
  const Matrix coef = ss_factor.solve(sigma_ns.transpose()).transpose();
  d.irrep_norm = inf_norm(coef);

  d.conditional_rho = noises.size() < static_cast<std::size_t>(p - static_cast<Index>(s.size())) ? 1.0 : 0.0;
  for (Index r = 0; r < coef.rows(); ++r) {
    const double cond_var = 1.0 - coef.row(r).dot(sigma_ns.row(r));
    d.conditional_rho = std::max(d.conditional_rho, cond_var);
  }

  if (retained) {
    const IndexSet kept = make_index_set(*retained);
    std::vector<Index> cols;
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (!std::binary_search(kept.begin(), kept.end(), s[c])) cols.push_back(static_cast<Index>(c));
    }
    Matrix sub(coef.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Index>(c)) = coef.col(cols[c]);
    d.restricted_irrep_norm = inf_norm(sub);
  }
  return d;
}

StrongSets strong_sets(const ScenarioSpec& spec, double threshold, double margin) {
  if (!(threshold > 0.0)) throw Error("strong_sets: threshold must be > 0");
  if (!(margin >= 0.0)) throw Error("strong_sets: margin must be >= 0");
  const BlockCovariance cov = build_covariance(spec);
  const Vector bm = cov.times(spec.beta());
  const IndexSet s = spec.support();
  StrongSets out;
  std::size_t k = 0;
  for (Index j = 0; j < cov.p(); ++j) {
    const double a = std::abs(bm[j]);
    if (k < s.size() && s[k] == j) {
      ++k;
      if (a > threshold + margin) out.strong_signals.push_back(j);
    } else if (a != 0.0 && a >= threshold - margin) {
      out.strong_noises.push_back(j);
    }
  }
  return out;
}

FalseRetentionDiagnostics false_retention_diagnostics(const ScenarioSpec& spec, double threshold, double margin) {
  FalseRetentionDiagnostics out;
  out.sets = strong_sets(spec, threshold, margin);
  const BlockCovariance cov = build_covariance(spec);
  const IndexSet s = spec.support();
  const IndexSet& z = out.sets.strong_noises;
  const IndexSet& r = out.sets.strong_signals;
  if (z.size() > 20) throw Error("false_retention_diagnostics: strong noise set too large to enumerate");
  if (s.empty()) return out;

  const IndexSet sz = set_union(s, z);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov.submatrix(sz, sz), Eigen::EigenvaluesOnly);
  out.min_eig_signal_noise = eig.eigenvalues().minCoeff();

  const Eigen::LDLT<Matrix> ss_factor(cov.submatrix(s, s));
  if (!z.empty()) {
    out.noise_irrep_norm = inf_norm(ss_factor.solve(cov.submatrix(s, z)).transpose());
  }

  const IndexSet penalized_signals = set_difference(s, r);
  const IndexSet block_all = [&] {
    IndexSet b;
    for (Index j = 0; j < cov.block_size(); ++j) b.push_back(j);
    return b;
  }();
  const std::size_t subsets = std::size_t{1} << z.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    IndexSet q = s;
    for (std::size_t b = 0; b < z.size(); ++b) {
      if (mask & (std::size_t{1} << b)) q.push_back(z[b]);
    }
    q = make_index_set(std::move(q));
    // Only block rows can be nonzero in Sigma_{Q^c Q}.
    const IndexSet rows = set_difference(block_all, q);
    ++out.subsets_checked;
    if (rows.empty() || penalized_signals.empty()) continue;
    const Eigen::LDLT<Matrix> qq(cov.submatrix(q, q));
    const Matrix coef = qq.solve(cov.submatrix(q, rows)).transpose();
    Matrix sub(coef.rows(), static_cast<Index>(penalized_signals.size()));
    for (std::size_t c = 0; c < penalized_signals.size(); ++c) {
      const auto pos = std::lower_bound(q.begin(), q.end(), penalized_signals[c]) - q.begin();
      sub.col(static_cast<Index>(c)) = coef.col(pos);
    }
    out.restricted_irrep_max = std::max(out.restricted_irrep_max, inf_norm(sub));
  }
  return out;
}

}  // namespace rar
