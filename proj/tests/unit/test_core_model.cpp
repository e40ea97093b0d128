#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rar/core_model.hpp"

using namespace rar;

namespace {

std::vector<std::int8_t> signs(std::initializer_list<int> v) {
  return std::vector<std::int8_t>(v.begin(), v.end());
}

}  // namespace

TEST(SignOf, ZeroVector) {
  EXPECT_EQ(sign_of(CoefficientVector(Vector::Zero(3)), 0.0).signs, signs({0, 0, 0}));
}

TEST(SignOf, Scenario1ABeta) {
  Vector b(4);
  b << 3, -2, 2, -2;
  EXPECT_EQ(sign_of(CoefficientVector(b), 1e-8).signs, signs({1, -1, 1, -1}));
}

TEST(SignOf, BelowTolerance) {
  Vector b(2);
  b << 1e-9, -0.5;
  EXPECT_EQ(sign_of(CoefficientVector(b), 1e-8).signs, signs({0, -1}));
}

TEST(SignOf, NegativeToleranceRejected) {
  EXPECT_THROW(sign_of(CoefficientVector(Vector::Ones(2)), -1.0), Error);
}

TEST(SignOf, NegationFlipsEveryNonzero) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    Vector v(7);
    for (Index j = 0; j < 7; ++j) v[j] = pick(gen) == 0 ? 0.0 : std::normal_distribution<double>()(gen);
    const CoefficientVector c(v);
    const SignPattern a = sign_of(c);
    const SignPattern b = sign_of(-c);
    for (std::size_t j = 0; j < a.signs.size(); ++j) EXPECT_EQ(a.signs[j], -b.signs[j]);
  }
}

TEST(CoefficientVector, SupportMatchesNonzeros) {
  std::mt19937_64 gen(3);
  std::bernoulli_distribution zero(0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const Index p = 1 + trial % 20;
    Vector v(p);
    IndexSet expect;
    for (Index j = 0; j < p; ++j) {
      v[j] = zero(gen) ? 0.0 : std::normal_distribution<double>()(gen);
      if (v[j] != 0.0) expect.push_back(j);
    }
    EXPECT_EQ(CoefficientVector(v).support(), expect);
  }
}

TEST(Standardize, AffineColumn) {
  Matrix x(3, 1);
  x << 1, 2, 3;
  const Dataset s = standardize(Dataset::make(x, Vector::Zero(3)));
  EXPECT_NEAR(s.x.col(0).mean(), 0.0, 1e-15);
  EXPECT_NEAR(std::sqrt(s.x.col(0).squaredNorm() / 3.0), 1.0, 1e-12);
  EXPECT_NEAR(s.column_means[0], 2.0, 1e-15);
  EXPECT_NEAR(s.column_scales[0], std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_TRUE(s.standardized);
}

TEST(Standardize, ConstantColumnFlagged) {
  Matrix x(3, 2);
  x << 5, 1, 5, 2, 5, 4;
  const Dataset s = standardize(Dataset::make(x, Vector::Zero(3)));
  EXPECT_EQ(s.degenerate_columns, IndexSet{0});
  EXPECT_EQ(s.x.col(0), Vector::Zero(3));
  EXPECT_EQ(s.column_scales[0], 1.0);
}

TEST(Standardize, Idempotent) {
  std::mt19937_64 gen(5);
  const Matrix x = oracle::gaussian_matrix(30, 6, gen) * 3.0;
  const Dataset once = standardize(Dataset::make(x, oracle::gaussian_vector(30, gen)));
  Dataset plain = Dataset::make(once.x, once.y);
  const Dataset twice = standardize(plain);
  EXPECT_LE((twice.x - once.x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, NeedsTwoRows) {
  EXPECT_THROW(Dataset::make(Matrix::Ones(1, 2), Vector::Ones(1)), Error);
}

TEST(Dataset, RejectsNonFinite) {
  Matrix x = Matrix::Ones(3, 2);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Dataset::make(x, Vector::Ones(3)), Error);
  EXPECT_THROW(Dataset::make(Matrix::Ones(3, 2), Vector::Ones(4)), Error);
}

TEST(Dataset, RowsKeepsTruthAndResetsScaling) {
  std::mt19937_64 gen(9);
  Dataset d = Dataset::make(oracle::gaussian_matrix(6, 2, gen), oracle::gaussian_vector(6, gen),
                            CoefficientVector(Vector::Ones(2)));
  const Dataset s = standardize(d).rows({0, 2, 4});
  EXPECT_EQ(s.n(), 3);
  ASSERT_TRUE(s.truth);
  EXPECT_FALSE(s.standardized);
  EXPECT_EQ(s.column_scales, Vector::Ones(2));
}

TEST(PenaltyProfile, Validation) {
  PenaltyProfile p = PenaltyProfile::all_excluded(3);
  EXPECT_THROW(p.validate(), Error);
  p.set_unpenalized(1);
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW(p.set_weighted(0, 0.0), Error);
  EXPECT_THROW(p.set_weighted(0, std::numeric_limits<double>::infinity()), Error);
  p.set_weighted(2, 2.0);
  EXPECT_EQ(p.indices(PenaltyKind::Weighted), IndexSet{2});
  EXPECT_EQ(p.indices(PenaltyKind::Unpenalized), IndexSet{1});
  EXPECT_EQ(p.indices(PenaltyKind::Excluded), IndexSet{0});
  EXPECT_DOUBLE_EQ(p.scaled(3.0).weight(2), 6.0);
  EXPECT_THROW(p.scaled(-1.0), Error);
}

TEST(IndexSets, Algebra) {
  const IndexSet a = make_index_set({5, 1, 3, 1});
  EXPECT_EQ(a, (IndexSet{1, 3, 5}));
  const IndexSet b{3, 4};
  EXPECT_EQ(set_union(a, b), (IndexSet{1, 3, 4, 5}));
  EXPECT_EQ(set_difference(a, b), (IndexSet{1, 5}));
  EXPECT_EQ(set_intersection(a, b), IndexSet{3});
  EXPECT_EQ(complement(a, 6), (IndexSet{0, 2, 4}));
  EXPECT_TRUE(is_subset(IndexSet{3}, a));
  EXPECT_FALSE(is_subset(b, a));
}
