#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rar/core_model.hpp"

namespace rar {

struct EquicorrelatedBlock {
  Index size = 0;
  double r = 0.0;
};

struct ExplicitBlock {
  Matrix matrix;
};

/// Parametric Gaussian design: Sigma = blockdiag(block, I), beta = (beta_s, 0).
struct ScenarioSpec {
  std::string name = "custom";
  std::variant<EquicorrelatedBlock, ExplicitBlock> block;
  double sigma = 1.0;
  Vector beta_s;
  Index n = 100;
  std::optional<Index> p;  ///< nullopt: p follows dimension_rule(n)

  Index dimension() const;
  Index block_size() const;
  Matrix block_matrix() const;
  /// Full-length beta (p entries).
  Vector beta() const;
  /// Indices j < block size with beta_s[j] != 0.
  IndexSet support() const;

  ScenarioSpec with_n(Index new_n) const;
};

/// floor(100 * exp(n^0.2)).
Index dimension_rule(Index n);

/// The four simulation scenarios "1A", "1B", "2C", "2D" with their published parameters.
ScenarioSpec builtin_scenario(std::string_view name, Index n);
std::vector<std::string> builtin_scenario_names();

/// Sigma in compact form: a dense leading block followed by an identity tail.
class BlockCovariance {
 public:
  /// Throws Error unless the block is symmetric, has unit diagonal and is positive definite.
  BlockCovariance(Matrix block, Index p);

  Index p() const noexcept { return p_; }
  Index block_size() const noexcept { return block_.rows(); }
  const Matrix& block() const noexcept { return block_; }
  const Matrix& cholesky_lower() const noexcept { return chol_; }

  double operator()(Index i, Index j) const;
  Matrix submatrix(const IndexSet& rows, const IndexSet& cols) const;
  /// Sigma * v for a length-p vector.
  Vector times(const Vector& v) const;
  /// Dense p x p copy; intended for small p in tests.
  Matrix dense() const;

 private:
  Matrix block_;
  Matrix chol_;
  Index p_ = 0;
};

BlockCovariance build_covariance(const ScenarioSpec& spec);

/// n iid rows X_i ~ N(0, Sigma), Y_i = X_i'beta + sigma * eps_i. Pure in (spec, seed).
Dataset sample_dataset(const ScenarioSpec& spec, std::uint64_t seed);

struct PopulationDiagnostics {
  Vector marginal_corr;     ///< corr(X_j, Y) = (Sigma beta)_j / sqrt(var_y)
  Vector marginal_coef;     ///< beta^M_j = cov(X_j, Y) = (Sigma beta)_j
  double zeta = 0.0;        ///< || Sigma_{S^c S} beta_S ||_inf
  double irrep_norm = 0.0;  ///< || Sigma_{S^c S} Sigma_SS^{-1} ||_inf
  std::optional<double> restricted_irrep_norm;  ///< same, columns S minus retained
  double min_eig_ss = 0.0;  ///< Lambda_min(Sigma_SS)
  double var_y = 0.0;
  double conditional_rho = 0.0;    ///< max diagonal of Sigma_{S^c | S}
  double sigma_beta_inf = 0.0;     ///< || Sigma beta ||_inf
  double signal_quadratic = 0.0;   ///< beta_S' Sigma_SS beta_S
  double min_abs_beta = 0.0;       ///< min_{j in S} |beta_j|
  IndexSet support;
};

PopulationDiagnostics population_diagnostics(const ScenarioSpec& spec,
                                             const std::optional<IndexSet>& retained = std::nullopt);

struct StrongSets {
  IndexSet strong_signals;  ///< R: signals with |beta^M| > threshold + margin
  IndexSet strong_noises;   ///< Z: noises with beta^M != 0 and |beta^M| >= threshold - margin
};

StrongSets strong_sets(const ScenarioSpec& spec, double threshold, double margin);

/// Population quantities attached to false retention in the three-step procedure.
struct FalseRetentionDiagnostics {
  StrongSets sets;
  double min_eig_signal_noise = 0.0;   ///< Lambda_min(Sigma over S union Z)
  double restricted_irrep_max = 0.0;   ///< max over S <= Q <= S u Z of the restricted irrepresentable norm
  double noise_irrep_norm = 0.0;       ///< || Sigma_ZS Sigma_SS^{-1} ||_inf
  std::size_t subsets_checked = 0;
};

/// Throws if |Z| > 20 (the Q enumeration is exponential in |Z|).
FalseRetentionDiagnostics false_retention_diagnostics(const ScenarioSpec& spec, double threshold,
                                                      double margin);

/// Row-wise max absolute sum, the matrix infinity norm.
double inf_norm(const Matrix& m);

}  // namespace rar
