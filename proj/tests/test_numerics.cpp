#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oedsel/numerics.hpp"
#include "test_util.hpp"

using namespace oedsel;
using oedsel::test::random_spd;

TEST(SelectSubmatrix, IdentityCase) {
  std::vector<Index> idx{0, 2};
  Matrix sub = select_submatrix(Matrix::Identity(4, 4), idx, idx);
  EXPECT_TRUE(sub.isApprox(Matrix::Identity(2, 2)));
}

TEST(SelectSubmatrix, PicksEntries) {
  Matrix m(3, 3);
  m << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  std::vector<Index> idx{1, 2};
  Matrix expected(2, 2);
  expected << 5, 6, 6, 9;
  EXPECT_EQ(select_submatrix(m, idx, idx), expected);
}

TEST(SelectSubmatrix, FullSelectionAndMatchesSelectionMatrices) {
  std::mt19937_64 rng(3);
  Matrix m = random_spd(5, rng);
  std::vector<Index> all{0, 1, 2, 3, 4};
  EXPECT_EQ(select_submatrix(m, all, all), m);

  std::vector<Index> rows{4, 1};
  std::vector<Index> cols{0, 2, 3};
  Matrix pr = Matrix::Zero(5, 2);
  Matrix pc = Matrix::Zero(5, 3);
  for (Index i = 0; i < rows.size(); ++i) pr(rows[i], i) = 1;
  for (Index i = 0; i < cols.size(); ++i) pc(cols[i], i) = 1;
  EXPECT_TRUE(select_submatrix(m, rows, cols).isApprox(pr.transpose() * m * pc));
}

TEST(SelectSubmatrix, OutOfRange) {
  std::vector<Index> bad{0, 3};
  EXPECT_THROW(select_submatrix(Matrix::Identity(3, 3), bad, bad), IndexError);
}

TEST(SchurComplement, IndependenceCase) {
  std::vector<Index> a{0};
  auto c = schur_complement(SymMatrix::identity(3), a);
  EXPECT_TRUE(c.cov.matrix().isApprox(Matrix::Identity(2, 2)));
  EXPECT_EQ(c.surviving.surviving(), (std::vector<Index>{1, 2}));
}

TEST(SchurComplement, TwoByTwoMatchesInverseOracle) {
  Matrix s(2, 2);
  s << 2, 1, 1, 2;
  std::vector<Index> a{1};
  auto c = schur_complement(SymMatrix(s), a);
  ASSERT_EQ(c.cov.dim(), 1u);
  // ((S^{-1})_{00})^{-1}
  const double oracle = 1.0 / s.inverse()(0, 0);
  EXPECT_NEAR(oracle, 1.5, 1e-14);
  EXPECT_NEAR(c.cov(0, 0), oracle, 1e-14);
}

TEST(SchurComplement, MatchesDenseInverseOracle) {
  std::mt19937_64 rng(11);
  Matrix s = random_spd(6, rng);
  std::vector<Index> a{1, 4};
  std::vector<Index> b{0, 2, 3, 5};
  Matrix inv = s.inverse();
  Matrix oracle = select_submatrix(inv, b, b).inverse();
  auto c = schur_complement(SymMatrix(s), a);
  EXPECT_EQ(c.surviving.surviving(), b);
  EXPECT_LT(test::rel_diff(c.cov.matrix(), oracle), 1e-10);
}

TEST(SchurComplement, EmptyConditioningIsIdentityMap) {
  std::mt19937_64 rng(2);
  SymMatrix s(random_spd(4, rng));
  auto c = schur_complement(s, std::vector<Index>{});
  EXPECT_EQ(c.cov.matrix(), s.matrix());
  EXPECT_EQ(c.surviving.size(), 4u);
}

TEST(SchurComplement, JitterRescuesSingularBlock) {
  Matrix s(3, 3);
  s << 1, 1, 0, 1, 1, 0, 0, 0, 1;
  std::vector<Index> a{0, 1};
  auto c = schur_complement(SymMatrix(s), a);
  EXPECT_NEAR(c.cov(0, 0), 1.0, 1e-9);
}

TEST(SchurComplement, DegenerateBlockNamesIndices) {
  Matrix s = Matrix::Zero(3, 3);
  s(2, 2) = 1.0;
  std::vector<Index> a{0, 1};
  try {
    schur_complement(SymMatrix(s), a);
    FAIL() << "expected DegenerateBlockError";
  } catch (const DegenerateBlockError& e) {
    EXPECT_EQ(e.indices(), (std::vector<Index>{0, 1}));
  }
  Matrix indefinite(2, 2);
  indefinite << -1, 0, 0, 1;
  EXPECT_THROW(schur_complement(SymMatrix(indefinite), std::vector<Index>{0}), DegenerateBlockError);
}

TEST(SchurComplement, RejectsBadIndices) {
  EXPECT_THROW(schur_complement(SymMatrix::identity(3), std::vector<Index>{3}), IndexError);
  EXPECT_THROW(schur_complement(SymMatrix::identity(3), std::vector<Index>{1, 1}), IndexError);
}

TEST(SchurComplement, CountsInversionWork) {
  std::mt19937_64 rng(5);
  SymMatrix s(random_spd(10, rng));
  OpCounters ops;
  schur_complement(s, std::vector<Index>{0, 1, 2}, &ops);
  EXPECT_EQ(ops.factorizations, 1u);
  // Cholesky of 3x3 (10) plus 7 triangular solves of size 3 (6 each).
  EXPECT_EQ(ops.inversion_mults, 10u + 7u * 6u);
  EXPECT_GT(ops.mults, ops.inversion_mults);
}

// Property tests over random instances.

class SchurProperties : public ::testing::TestWithParam<int> {};

TEST_P(SchurProperties, InverseIdentity) {
  std::mt19937_64 rng(GetParam());
  const Index n = 2 + rng() % 9;
  Matrix s = random_spd(n, rng);
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const Index k = 1 + rng() % (n - 1);
  std::vector<Index> a(perm.begin(), perm.begin() + k);
  auto c = schur_complement(SymMatrix(s), a);
  Matrix inv_block = select_submatrix(s.inverse(), c.surviving.surviving(), c.surviving.surviving());
  EXPECT_LT(test::rel_diff(c.cov.matrix(), inv_block.inverse()), 1e-8);
}

TEST_P(SchurProperties, PsdPreservationAndDiagonalMonotonicity) {
  std::mt19937_64 rng(1000 + GetParam());
  const Index n = 3 + rng() % 8;
  // Rank-deficient PSD input exercises the tolerance.
  Matrix g = test::random_matrix(n, n - 1, rng);
  Matrix s = g * g.transpose() + 1e-3 * Matrix::Identity(n, n);
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const Index k = 1 + rng() % (n - 2);
  std::vector<Index> a(perm.begin(), perm.begin() + k);
  auto c = schur_complement(SymMatrix(s), a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(c.cov.matrix());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * s.trace() / static_cast<double>(n));

  // Adding one more index can only shrink every remaining conditional variance.
  std::vector<Index> a2 = a;
  a2.push_back(perm[k]);
  auto c2 = schur_complement(SymMatrix(s), a2);
  for (Index p = 0; p < c2.surviving.size(); ++p) {
    const Index orig = c2.surviving.original(p);
    const Index q = c.surviving.position_of(orig);
    EXPECT_LE(c2.cov(p, p), c.cov(q, q) + 1e-10);
  }
}

TEST_P(SchurProperties, NestedUpdatesMatchOneShot) {
  std::mt19937_64 rng(2000 + GetParam());
  const Index n = 4 + rng() % 7;
  Matrix s = random_spd(n, rng);
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const Index k = 1 + rng() % (n - 2);
  std::vector<Index> a(perm.begin(), perm.begin() + k);

  auto oneshot = schur_complement(SymMatrix(s), a);

  SymMatrix cur(s);
  IndexMap map = IndexMap::identity(n);
  for (Index orig : a) {
    const Index local = map.position_of(orig);
    auto step = schur_complement(cur, std::vector<Index>{local});
    cur = step.cov;
    map.remove(orig);
  }
  EXPECT_EQ(map.surviving(), oneshot.surviving.surviving());
  EXPECT_LT(test::rel_diff(cur.matrix(), oneshot.cov.matrix()), 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Random, SchurProperties, ::testing::Range(0, 40));

TEST(SampleCovariance, ConstantSamplesGiveZero) {
  Matrix x = Matrix::Constant(5, 3, 2.5);
  EXPECT_EQ(sample_covariance(x).matrix(), Matrix::Zero(3, 3));
}

TEST(SampleCovariance, UnbiasedNormalizer) {
  Matrix x(2, 2);
  x << 0, 0, 2, 2;
  Matrix expected(2, 2);
  expected << 2, 2, 2, 2;
  EXPECT_TRUE(sample_covariance(x).matrix().isApprox(expected));
}

TEST(SampleCovariance, NeedsTwoSamples) {
  EXPECT_THROW(sample_covariance(Matrix::Zero(1, 3)), InsufficientSamplesError);
}

TEST(SampleCovariance, ConvergesToKnownCovariance) {
  Matrix sigma(3, 3);
  sigma << 2.0, 0.5, -0.3, 0.5, 1.0, 0.2, -0.3, 0.2, 0.5;
  const Matrix l = cholesky_lower(sigma);
  std::normal_distribution<double> normal;
  // Entrywise error should scale like M^{-1/2}: averaged over seeds, the
  // error at 16x the samples is about a quarter.
  auto mean_err = [&](Index m) {
    double acc = 0.0;
    for (int seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed);
      Matrix x(m, 3);
      for (Index r = 0; r < m; ++r) {
        Vector z(3);
        for (auto& v : z) v = normal(rng);
        x.row(r) = (l * z).transpose();
      }
      acc += test::max_abs(sample_covariance(x).matrix() - sigma);
    }
    return acc / 10.0;
  };
  const double e1 = mean_err(1000);
  const double e2 = mean_err(16000);
  EXPECT_LT(e1, 5.0 * 2.0 / std::sqrt(1000.0));
  EXPECT_LT(e2, 5.0 * 2.0 / std::sqrt(16000.0));
  EXPECT_GT(e1 / e2, 2.0);
  EXPECT_LT(e1 / e2, 8.0);
}

TEST(LogDet, Identity) { EXPECT_DOUBLE_EQ(logdet_psd(SymMatrix::identity(4)), 0.0); }

TEST(LogDet, Diagonal) {
  Vector d(2);
  d << 2, 3;
  EXPECT_NEAR(logdet_psd(SymMatrix::diagonal(d)), std::log(6.0), 1e-15);
}

TEST(LogDet, MatchesEigenvalueOracle) {
  std::mt19937_64 rng(7);
  Matrix s = random_spd(5, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const double oracle = es.eigenvalues().array().log().sum();
  EXPECT_NEAR(logdet_psd(SymMatrix(s)), oracle, 1e-10 * std::abs(oracle) + 1e-12);
}

TEST(LogDet, RejectsNonPositiveDefinite) {
  Matrix s(2, 2);
  s << 1, 2, 2, 1;
  EXPECT_THROW(logdet_psd(SymMatrix(s)), NotPositiveDefiniteError);
}

TEST(SymMatrixType, EnforcesSymmetryAndFiniteness) {
  Matrix m(2, 2);
  m << 1, 2, 4, 1;
  SymMatrix s(m);
  EXPECT_EQ(s(0, 1), s(1, 0));
  EXPECT_EQ(s(0, 1), 3.0);
  m(0, 0) = std::nan("");
  EXPECT_THROW(SymMatrix{m}, NumericalError);
  EXPECT_THROW(SymMatrix(Matrix::Zero(2, 3)), ConfigError);
}

TEST(DesignType, Invariants) {
  Design d(5);
  d.push_back(3);
  d.push_back(0);
  EXPECT_THROW(d.push_back(3), IndexError);
  EXPECT_THROW(d.push_back(5), IndexError);
  EXPECT_EQ(d.to_string(), "3;0");
  EXPECT_EQ(Design::parse("3;0", 5), d);
  EXPECT_THROW(Design::parse("3;x", 5), ConfigError);
  EXPECT_EQ(d.prefix(1).indices(), (std::vector<Index>{3}));
}

TEST(IndexMapType, ComplementAndRemoval) {
  std::vector<Index> taken{4, 1};
  IndexMap m = IndexMap::complement_of(taken, 6);
  EXPECT_EQ(m.surviving(), (std::vector<Index>{0, 2, 3, 5}));
  EXPECT_EQ(m.position_of(3), 2u);
  EXPECT_EQ(m.position_of(4), m.size());
  m.remove(2);
  EXPECT_EQ(m.original(1), 3u);
}
