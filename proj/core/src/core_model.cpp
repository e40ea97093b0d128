#include "rar/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace rar {

CoefficientVector::CoefficientVector(Vector values) : values_(std::move(values)) {
  for (Index j = 0; j < values_.size(); ++j) {
    if (values_[j] != 0.0) support_.push_back(j);
  }
}

CoefficientVector CoefficientVector::zeros(Index p) {
  return CoefficientVector(Vector::Zero(p));
}

CoefficientVector CoefficientVector::operator-() const {
  return CoefficientVector(Vector(-values_));
}

bool CoefficientVector::operator==(const CoefficientVector& other) const {
  return values_.size() == other.values_.size() && values_ == other.values_;
}

SignPattern sign_of(const CoefficientVector& beta, double zero_tol) {
  if (!(zero_tol >= 0.0)) throw Error("sign_of: zero_tol must be non-negative");
  SignPattern out;
  out.signs.resize(static_cast<std::size_t>(beta.size()));
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = beta[j];
    std::int8_t s = 0;
    if (std::abs(v) > zero_tol) s = v > 0 ? 1 : -1;
    out.signs[static_cast<std::size_t>(j)] = s;
  }
  return out;
}

void validate(const Dataset& data) {
  if (data.n() < 2) throw Error("dataset needs at least 2 rows");
  if (data.p() < 1) throw Error("dataset needs at least 1 column");
  if (data.y.size() != data.n()) throw Error("response length does not match design rows");
  if (!data.x.allFinite()) throw Error("design matrix contains non-finite entries");
  if (!data.y.allFinite()) throw Error("response contains non-finite entries");
  if (data.column_means.size() != data.p() || data.column_scales.size() != data.p())
    throw Error("column metadata has wrong length");
  if (data.truth && data.truth->size() != data.p())
    throw Error("truth coefficient vector has wrong length");
  if (!data.column_names.empty() && static_cast<Index>(data.column_names.size()) != data.p())
    throw Error("column_names has wrong length");
  if (data.standardized) {
    const Vector means = column_means(data.x);
    const Vector sds = column_sds(data.x, means);
    std::size_t k = 0;
    for (Index j = 0; j < data.p(); ++j) {
      const bool degenerate = k < data.degenerate_columns.size() && data.degenerate_columns[k] == j;
      if (degenerate) ++k;
      if (std::abs(means[j]) > 1e-10) throw Error("standardized column is not centered");
      if (!degenerate && std::abs(sds[j] - 1.0) > 1e-8) throw Error("standardized column does not have unit sd");
    }
  }
}

Dataset Dataset::make(Matrix x, Vector y, std::optional<CoefficientVector> truth) {
  Dataset d;
  d.x = std::move(x);
  d.y = std::move(y);
  d.column_means = Vector::Zero(d.x.cols());
  d.column_scales = Vector::Ones(d.x.cols());
  d.truth = std::move(truth);
  validate(d);
  return d;
}

Dataset Dataset::rows(const std::vector<Index>& which) const {
  Dataset d;
  d.x.resize(static_cast<Index>(which.size()), p());
  d.y.resize(static_cast<Index>(which.size()));
  for (std::size_t i = 0; i < which.size(); ++i) {
    const Index r = which[i];
    if (r < 0 || r >= n()) throw Error("row index out of range");
    d.x.row(static_cast<Index>(i)) = x.row(r);
    d.y[static_cast<Index>(i)] = y[r];
  }
  d.column_means = Vector::Zero(p());
  d.column_scales = Vector::Ones(p());
  d.truth = truth;
  d.column_names = column_names;
  return d;
}

Vector column_means(const Matrix& x) {
  return x.colwise().mean().transpose();
}

Vector column_sds(const Matrix& x, const Vector& means) {
  Vector sds(x.cols());
  const double n = static_cast<double>(x.rows());
  for (Index j = 0; j < x.cols(); ++j) {
    sds[j] = std::sqrt((x.col(j).array() - means[j]).square().sum() / n);
  }
  return sds;
}

Dataset standardize(const Dataset& data) {
  validate(data);
  Dataset out = data;
  const Vector means = column_means(data.x);
  const Vector sds = column_sds(data.x, means);
  out.degenerate_columns.clear();
  for (Index j = 0; j < data.p(); ++j) {
    // Relative test so that columns of large magnitude with rounding noise still count as constant.
    const double magnitude = std::max(1.0, std::abs(means[j]));
    double scale = sds[j];
    if (!(scale > 1e-12 * magnitude)) {
      scale = 1.0;
      out.degenerate_columns.push_back(j);
      out.x.col(j).setZero();
    } else {
      out.x.col(j) = (data.x.col(j).array() - means[j]) / scale;
    }
    // Compose with any earlier standardization so metadata always maps back to the raw scale.
    out.column_means[j] = data.column_means[j] + data.column_scales[j] * means[j];
    out.column_scales[j] = data.column_scales[j] * scale;
  }
  out.standardized = true;
  return out;
}

PenaltyProfile PenaltyProfile::uniform(Index p, double weight) {
  if (p < 1) throw Error("penalty profile needs at least one feature");
  PenaltyProfile prof;
  prof.kinds_.assign(static_cast<std::size_t>(p), PenaltyKind::Weighted);
  prof.weights_ = Vector::Constant(p, weight);
  if (!(std::isfinite(weight) && weight > 0.0)) throw Error("penalty weight must be finite and > 0");
  return prof;
}

PenaltyProfile PenaltyProfile::all_excluded(Index p) {
  PenaltyProfile prof;
  prof.kinds_.assign(static_cast<std::size_t>(p), PenaltyKind::Excluded);
  prof.weights_ = Vector::Zero(p);
  return prof;
}

void PenaltyProfile::set_unpenalized(Index j) {
  kinds_.at(static_cast<std::size_t>(j)) = PenaltyKind::Unpenalized;
  weights_[j] = 0.0;
}

void PenaltyProfile::set_weighted(Index j, double weight) {
  if (!(std::isfinite(weight) && weight > 0.0)) throw Error("penalty weight must be finite and > 0");
  kinds_.at(static_cast<std::size_t>(j)) = PenaltyKind::Weighted;
  weights_[j] = weight;
}

void PenaltyProfile::set_excluded(Index j) {
  kinds_.at(static_cast<std::size_t>(j)) = PenaltyKind::Excluded;
  weights_[j] = 0.0;
}

IndexSet PenaltyProfile::indices(PenaltyKind kind) const {
  IndexSet out;
  for (std::size_t j = 0; j < kinds_.size(); ++j) {
    if (kinds_[j] == kind) out.push_back(static_cast<Index>(j));
  }
  return out;
}

bool PenaltyProfile::has_weighted() const {
  return std::find(kinds_.begin(), kinds_.end(), PenaltyKind::Weighted) != kinds_.end();
}

void PenaltyProfile::validate() const {
  bool any_free = false;
  for (std::size_t j = 0; j < kinds_.size(); ++j) {
    if (kinds_[j] == PenaltyKind::Weighted) {
      const double w = weights_[static_cast<Index>(j)];
      if (!(std::isfinite(w) && w > 0.0)) throw Error("penalty weight must be finite and > 0");
    }
    if (kinds_[j] != PenaltyKind::Excluded) any_free = true;
  }
  if (!any_free) throw Error("penalty profile excludes every feature");
}

PenaltyProfile PenaltyProfile::scaled(double factor) const {
  if (!(std::isfinite(factor) && factor > 0.0)) throw Error("scale factor must be finite and > 0");
  PenaltyProfile out = *this;
  for (std::size_t j = 0; j < kinds_.size(); ++j) {
    if (kinds_[j] == PenaltyKind::Weighted) out.weights_[static_cast<Index>(j)] *= factor;
  }
  return out;
}

IndexSet make_index_set(std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

bool is_subset(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet complement(const IndexSet& a, Index p) {
  IndexSet out;
  out.reserve(static_cast<std::size_t>(std::max<Index>(0, p - static_cast<Index>(a.size()))));
  std::size_t k = 0;
  for (Index j = 0; j < p; ++j) {
    if (k < a.size() && a[k] == j) {
      ++k;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace rar
