#pragma once

#include <cstdint>
#include <vector>

#include "rar/core_model.hpp"
#include "rar/wlasso.hpp"

namespace rar {

struct MarginalStats {
  Vector coef;                  ///< slope of y on each centered column
  std::vector<Index> abs_rank;  ///< column indices by |coef| descending, ties by index
  IndexSet constant_columns;    ///< assigned coef 0
};

/// coef_j = sum_i (x_ij - mean_j) y_i / sum_i (x_ij - mean_j)^2.
MarginalStats marginal_coefficients(const Dataset& data);
MarginalStats marginal_coefficients(const Matrix& x, const Vector& y);

/// The d largest |coef| (ties by index), sorted by index.
IndexSet sis_select(const MarginalStats& stats, Index d);

/// floor(n / log n), at least 1.
Index default_screen_size(Index n);

struct IsisOptions {
  Index d = 0;          ///< final size; 0 means default_screen_size(n)
  int iterations = 3;
  Index per_iter = 0;   ///< 0 means ceil(d / 3)
  double gic_multiplier = 1.0;
  SolverConfig solver;
};

struct IsisResult {
  IndexSet selected;                 ///< sorted
  std::vector<Index> order;          ///< selection order (after truncation)
  std::vector<IndexSet> added;       ///< columns added at each iteration
};

/// Iterated screening: each round fits a lasso on the current set (lambda by GIC) and
/// screens the remaining columns against its residuals.
IsisResult isis_select(const Dataset& data, const IsisOptions& options);

/// Per-permutation maxima max_j |D_k^j| for k = 1..m. Permutation k uses its own seed
/// derived from (seed, k), so the first m' entries do not depend on m.
std::vector<double> permutation_maxima(const Dataset& data, int m, std::uint64_t seed);

/// gamma = max over the first m permutation maxima.
double permutation_threshold(const Dataset& data, int m, std::uint64_t seed);

struct RetentionResult {
  double gamma = 0.0;
  IndexSet retained;  ///< sorted
  bool capped = false;
};

/// ceil(sqrt(n)).
Index retention_cap(Index n);

/// {j : |coef_j| >= gamma}, reduced to the retention_cap(n) largest when cap is set.
RetentionResult retain(const MarginalStats& stats, double gamma, Index n, bool cap = true);

}  // namespace rar
