#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rar {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted, duplicate-free list of 0-based column indices.
using IndexSet = std::vector<Index>;

/// Raised on contract violations (bad dimensions, non-finite input, invalid configuration).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficients below this magnitude count as zero when forming sign patterns.
inline constexpr double kDefaultZeroTol = 1e-8;

/// Coefficient vector with a support set that is kept in sync with the values.
class CoefficientVector {
 public:
  CoefficientVector() = default;
  explicit CoefficientVector(Vector values);

  static CoefficientVector zeros(Index p);

  const Vector& values() const noexcept { return values_; }
  const IndexSet& support() const noexcept { return support_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index j) const { return values_[j]; }

  CoefficientVector operator-() const;
  bool operator==(const CoefficientVector& other) const;

 private:
  Vector values_;
  IndexSet support_;
};

/// Per-coordinate sign in {-1, 0, +1}.
struct SignPattern {
  std::vector<std::int8_t> signs;

  Index size() const noexcept { return static_cast<Index>(signs.size()); }
  bool operator==(const SignPattern&) const = default;
};

SignPattern sign_of(const CoefficientVector& beta, double zero_tol = kDefaultZeroTol);

/// Design matrix and response. Treated as immutable once built; share via const reference.
struct Dataset {
  Matrix x;                         ///< n x p, column-major
  Vector y;                         ///< length n
  Vector column_means;              ///< means removed by standardize (zeros otherwise)
  Vector column_scales;             ///< 1/n standard deviations divided out (ones otherwise)
  bool standardized = false;
  IndexSet degenerate_columns;      ///< zero-variance columns found by standardize
  std::optional<CoefficientVector> truth;
  std::vector<std::string> column_names;  ///< optional; empty or length p

  Index n() const noexcept { return x.rows(); }
  Index p() const noexcept { return x.cols(); }

  /// Validates shapes and finiteness; fills neutral means/scales.
  static Dataset make(Matrix x, Vector y, std::optional<CoefficientVector> truth = std::nullopt);

  /// Row subset, preserving truth and names. Scaling metadata is reset.
  Dataset rows(const std::vector<Index>& which) const;
};

void validate(const Dataset& data);

/// Centers each column and divides by its 1/n standard deviation. Zero-variance columns
/// are centered, keep scale 1 and are listed in degenerate_columns.
Dataset standardize(const Dataset& data);

/// Column means and 1/n standard deviations of x.
Vector column_means(const Matrix& x);
Vector column_sds(const Matrix& x, const Vector& means);

enum class PenaltyKind : std::uint8_t { Unpenalized, Weighted, Excluded };

/// Per-feature penalty status: 0-penalty, finite positive weight, or infinite penalty.
class PenaltyProfile {
 public:
  PenaltyProfile() = default;

  static PenaltyProfile uniform(Index p, double weight = 1.0);
  static PenaltyProfile all_excluded(Index p);

  void set_unpenalized(Index j);
  void set_weighted(Index j, double weight);
  void set_excluded(Index j);

  PenaltyKind kind(Index j) const { return kinds_[static_cast<std::size_t>(j)]; }
  double weight(Index j) const { return weights_[j]; }
  Index size() const noexcept { return weights_.size(); }

  IndexSet indices(PenaltyKind kind) const;
  bool has_weighted() const;

  /// Throws unless weights are finite and positive and at least one feature is free.
  void validate() const;

  /// Multiplies every Weighted weight by factor > 0.
  PenaltyProfile scaled(double factor) const;

 private:
  std::vector<PenaltyKind> kinds_;
  Vector weights_;
};

/// Helpers for index sets.
IndexSet make_index_set(std::vector<Index> indices);
bool is_subset(const IndexSet& a, const IndexSet& b);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
IndexSet complement(const IndexSet& a, Index p);

}  // namespace rar
