#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "oedsel/selectors.hpp"
#include "test_util.hpp"

using namespace oedsel;

namespace {

LinearGaussianModel random_lg(Index n, Index d, std::mt19937_64& rng) {
  return LinearGaussianModel(LinearGaussianParams{test::random_matrix(n, d, rng), SymMatrix(test::random_spd(d, rng)),
                                                  SymMatrix(test::random_spd(n, rng, 0.5))});
}

void expect_valid(const SelectorReport& r, Index n, Index k) {
  ASSERT_EQ(r.design.size(), k);
  ASSERT_EQ(r.per_step.size(), k);
  std::set<Index> seen;
  for (Index p = 0; p < k; ++p) {
    EXPECT_LT(r.design[p], n);
    EXPECT_EQ(r.design[p], r.per_step[p].index);
    seen.insert(r.design[p]);
  }
  EXPECT_EQ(seen.size(), k);
}

Matrix permute(const Matrix& a, const std::vector<Index>& perm) {
  // result(perm[i], perm[j]) = a(i, j)
  Matrix out(a.rows(), a.cols());
  for (Index i = 0; i < perm.size(); ++i)
    for (Index j = 0; j < perm.size(); ++j) out(perm[i], perm[j]) = a(i, j);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- LSIG

TEST(Lsig, DiagonalDominance) {
  Matrix f = Matrix::Zero(2, 2);
  f(0, 0) = 3;
  f(1, 1) = 1;
  SelectorReport r = select_lsig(SymMatrix(f), SymMatrix::identity(2), 2);
  EXPECT_EQ(r.design.indices(), (std::vector<Index>{0, 1}));
  EXPECT_DOUBLE_EQ(r.per_step[0].criterion, 3.0);
  EXPECT_EQ(r.selector, "lsig");
}

TEST(Lsig, ExactLinearGaussianFirstStep) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    LinearGaussianModel m = random_lg(8, 5, rng);
    auto q = m.exact_posterior_quantities();
    SelectorReport r = select_lsig(q.score_matrix, q.marginal_cov, 1);
    Vector oracle = (m.params().noise_cov.matrix().inverse() * q.marginal_cov.matrix()).diagonal().array() - 1.0;
    Index best = 0;
    oracle.maxCoeff(&best);
    EXPECT_EQ(r.design[0], best);
    EXPECT_NEAR(r.per_step[0].criterion, oracle(best), 1e-8 * std::abs(oracle(best)));
  }
}

TEST(Lsig, DiagonalModelPicksLargestRatio) {
  // Diagonal Sigma_Y and Sigma_eps: the criterion reduces to Sigma_Y,ii / Sigma_eps,ii - 1.
  Vector sy(5), se(5);
  sy << 2.0, 5.0, 3.0, 1.5, 4.0;
  se << 1.0, 2.0, 0.5, 1.0, 1.0;
  Matrix f = se.cwiseInverse().asDiagonal();
  f -= Matrix(sy.cwiseInverse().asDiagonal());
  SelectorReport r = select_lsig(SymMatrix(f), SymMatrix::diagonal(sy), 5);
  EXPECT_EQ(r.design.indices(), (std::vector<Index>{2, 4, 1, 0, 3}));
}

TEST(Lsig, ExhaustsAllCandidatesFromSamples) {
  std::mt19937_64 rng(6);
  LinearGaussianModel m = random_lg(6, 3, rng);
  JointSampleSet s = sample_joint(m, 200, 200, 1);
  SelectorReport r = select_lsig(m, s, 6);
  expect_valid(r, 6, 6);
  EXPECT_GT(r.ops.model_evals, 0u);
}

TEST(Lsig, PermutationEquivariant) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const Index n = 9;
    Matrix f = test::random_spd(n, rng);
    Matrix s = test::random_spd(n, rng);
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    SelectorReport a = select_lsig(SymMatrix(f), SymMatrix(s), 6);
    SelectorReport b = select_lsig(SymMatrix(permute(f, perm)), SymMatrix(permute(s, perm)), 6);
    for (Index p = 0; p < 6; ++p) {
      EXPECT_EQ(b.design[p], perm[a.design[p]]);
      EXPECT_NEAR(b.per_step[p].criterion, a.per_step[p].criterion, 1e-9 * std::abs(a.per_step[p].criterion));
    }
  }
}

TEST(Lsig, ConstantShiftInvariant) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(12);
    for (double& x : v) x = normal(rng);
    const Index base = detail::argmax_first(v);
    for (double c : {-100.0, -1.0, 0.5, 1e3}) {
      std::vector<double> w = v;
      for (double& x : w) x += c;
      EXPECT_EQ(detail::argmax_first(w), base);
    }
  }
  // Step-level: F + c S^{-1} shifts every diag(F S) entry by c.
  for (int t = 0; t < 20; ++t) {
    Matrix f = test::random_spd(7, rng);
    Matrix s = test::random_spd(7, rng);
    SelectorReport a = select_lsig(SymMatrix(f), SymMatrix(s), 1);
    SelectorReport b = select_lsig(SymMatrix(Matrix(f + 2.5 * s.inverse())), SymMatrix(s), 1);
    EXPECT_EQ(a.design[0], b.design[0]);
    EXPECT_NEAR(b.per_step[0].criterion - a.per_step[0].criterion, 2.5, 1e-8);
  }
}

TEST(Lsig, TiesGoToLowestIndex) {
  SelectorReport r = select_lsig(SymMatrix::identity(4), SymMatrix::identity(4), 4);
  EXPECT_EQ(r.design.indices(), (std::vector<Index>{0, 1, 2, 3}));
}

TEST(Lsig, DegenerateBlockCarriesPartialDesign) {
  Matrix s(3, 3);
  s << 1, 2, 0, 2, 1, 0, 0, 0, 1;
  Matrix f = Matrix::Zero(3, 3);
  f.diagonal() << 3, -1, -1;
  try {
    select_lsig(SymMatrix(f), SymMatrix(s), 3);
    FAIL() << "expected a selection error";
  } catch (const SelectionError& e) {
    EXPECT_EQ(e.partial_design(), (std::vector<Index>{0, 1}));
  }
}

TEST(Lsig, ValidatesInputs) {
  EXPECT_THROW(select_lsig(SymMatrix::identity(3), SymMatrix::identity(3), 0), ConfigError);
  EXPECT_THROW(select_lsig(SymMatrix::identity(3), SymMatrix::identity(3), 4), ConfigError);
  EXPECT_THROW(select_lsig(SymMatrix::identity(3), SymMatrix::identity(2), 1), ConfigError);
}

TEST(Lsig, CountsAreCubicInK) {
  // Conditioning cost: sum over steps of Cholesky + triangular solves.
  for (Index n : {20, 40}) {
    for (Index k : {2, 4, 8}) {
      SelectorReport r = select_lsig(SymMatrix::identity(n), SymMatrix::identity(n), k);
      std::uint64_t expected = 0;
      for (Index a = 1; a < k; ++a) expected += detail::cholesky_mults(a) + (n - a) * detail::trsv_mults(a);
      EXPECT_EQ(r.ops.inversion_mults, expected);
      EXPECT_EQ(r.ops.factorizations, k - 1);
    }
  }
}

// ---------------------------------------------------------------- Gaussian greedy

TEST(GaussGreedy, DiagonalRatioOrder) {
  Vector sy(6), se(6);
  sy << 2.0, 5.0, 3.0, 1.5, 4.0, 9.0;
  se << 1.0, 2.0, 0.5, 1.0, 1.0, 4.0;
  // ratios 2, 2.5, 6, 1.5, 4, 2.25
  for (auto mode : {GaussGreedyMode::incremental, GaussGreedyMode::direct}) {
    SelectorReport r = select_gauss_greedy(SymMatrix::diagonal(sy), SymMatrix::diagonal(se), 6, mode);
    EXPECT_EQ(r.design.indices(), (std::vector<Index>{2, 4, 1, 5, 0, 3}));
    EXPECT_NEAR(r.per_step[0].criterion, std::log(6.0), 1e-14);
  }
}

TEST(GaussGreedy, ExactCovariancesMatchStandardGreedy) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 15; ++t) {
    const Index n = 6 + static_cast<Index>(t % 7);
    LinearGaussianModel m = random_lg(n, 4, rng);
    GaussianInformation info = closed_form_information(m);
    const Index k = n / 2;
    SelectorReport g = select_gauss_greedy(info.marginal(), info.conditional(), k);
    SelectorReport oracle = select_greedy(
        n, k, [&](const Design& d, Index) { return mi_closed_form(info, d); }, "closed-form");
    EXPECT_EQ(g.design.indices(), oracle.design.indices());
    for (Index p = 0; p < k; ++p) EXPECT_NEAR(0.5 * g.per_step[p].criterion, oracle.per_step[p].criterion, 1e-9);
  }
}

TEST(GaussGreedy, FullDesignValueIsOrderFree) {
  std::mt19937_64 rng(10);
  LinearGaussianModel m = random_lg(7, 4, rng);
  GaussianInformation info = closed_form_information(m);
  SelectorReport g = select_gauss_greedy(info.marginal(), info.conditional(), 7);
  std::vector<Index> all(7);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_NEAR(0.5 * g.per_step.back().criterion, info(all), 1e-10);
}

TEST(GaussGreedy, IncrementalMatchesDirect) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    LinearGaussianModel m = random_lg(30, 12, rng);
    GaussianInformation info = closed_form_information(m);
    SelectorReport a = select_gauss_greedy(info.marginal(), info.conditional(), 25, GaussGreedyMode::incremental);
    SelectorReport b = select_gauss_greedy(info.marginal(), info.conditional(), 25, GaussGreedyMode::direct);
    EXPECT_EQ(a.design.indices(), b.design.indices());
    for (Index p = 0; p < 25; ++p) EXPECT_NEAR(a.per_step[p].criterion, b.per_step[p].criterion, 1e-8);
  }
}

TEST(GaussGreedy, SampleMomentsRecoverExactCovariances) {
  std::mt19937_64 rng(12);
  LinearGaussianModel m = random_lg(5, 3, rng);
  JointSampleSet s = sample_joint(m, 200000, 1, 3);
  GaussianMoments mom = estimate_gaussian_moments(s);
  auto q = m.exact_posterior_quantities();
  EXPECT_LT(test::rel_diff(mom.marginal.matrix(), q.marginal_cov.matrix()), 0.03);
  EXPECT_LT(test::rel_diff(mom.conditional.matrix(), m.params().noise_cov.matrix()), 0.03);
  SelectorReport r = select_gauss_greedy(m, s, 5);
  expect_valid(r, 5, 5);
}

TEST(GaussGreedy, DirectCountsScaleAsNk4) {
  auto count = [](Index n, Index k) {
    return static_cast<double>(
        select_gauss_greedy(SymMatrix::identity(n), SymMatrix::identity(n), k, GaussGreedyMode::direct)
            .ops.inversion_mults);
  };
  // Linear in n at fixed k.
  for (Index k : {4, 8}) {
    EXPECT_NEAR(count(160, k) / count(80, k), 2.0, 0.1);
  }
  // Quartic in k: local log-log slope approaches 4 from below.
  const double slope = std::log2(count(400, 32) / count(400, 16));
  EXPECT_GT(slope, 3.5);
  EXPECT_LT(slope, 4.2);
}

// ---------------------------------------------------------------- NMC greedy

TEST(NmcGreedy, StepCount) {
  EpidemicModel e{EpidemicParams{}};
  for (Index k : {1, 2, 3}) {
    SelectorReport r = select_nmc_greedy(e, k, NmcOptions{20, 10, 1, false});
    const Index n = e.n();
    EXPECT_EQ(r.ops.mi_evals, k * (2 * n - k + 1) / 2);
    EXPECT_EQ(r.per_step.back().ops.mi_evals, r.ops.mi_evals);
    expect_valid(r, n, k);
  }
}

TEST(NmcGreedy, ClosedFormOracleMatchesExactGreedy) {
  // Scalar parameter, three candidates with distinct gains.
  Matrix g(3, 1);
  g << 0.5, 2.0, 1.0;
  LinearGaussianModel m(LinearGaussianParams{g, SymMatrix::identity(1), SymMatrix::identity(3)});
  GaussianInformation info = closed_form_information(m);
  SelectorReport exact = select_gauss_greedy(info.marginal(), info.conditional(), 3);
  SelectorReport closed =
      select_greedy(3, 3, [&](const Design& d, Index) { return mi_closed_form(m, d); });
  EXPECT_EQ(closed.design.indices(), exact.design.indices());
  SelectorReport nmc = select_nmc_greedy(m, 1, NmcOptions{2000, 2000, 4, false});
  EXPECT_EQ(nmc.design[0], exact.design[0]);
}

TEST(NmcGreedy, IndependentModelStaysNearZero) {
  LinearGaussianModel m(LinearGaussianParams{Matrix::Zero(4, 2), SymMatrix::identity(2), SymMatrix::identity(4)});
  SelectorReport r = select_nmc_greedy(m, 2, NmcOptions{200, 200, 5, false});
  MIEstimate e = mi_nmc(m, r.design, NmcOptions{1000, 400, 6, false});
  EXPECT_LT(std::abs(e.value), 3 * e.std_error + 1e-12);
}

TEST(NmcGreedy, Deterministic) {
  SpatialPoissonModel p{SpatialPoissonParams{}};
  SelectorReport a = select_nmc_greedy(p, 3, NmcOptions{50, 20, 8, false});
  SelectorReport b = select_nmc_greedy(p, 3, NmcOptions{50, 20, 8, false});
  EXPECT_EQ(a.design.indices(), b.design.indices());
  for (Index s = 0; s < 3; ++s) EXPECT_EQ(a.per_step[s].criterion, b.per_step[s].criterion);
}

// ---------------------------------------------------------------- baselines

TEST(Random, FullSetAndDeterminism) {
  SelectorReport r = select_random(7, 7, 3);
  expect_valid(r, 7, 7);
  EXPECT_EQ(select_random(20, 5, 11).design.indices(), select_random(20, 5, 11).design.indices());
  EXPECT_NE(select_random(20, 5, 11).design.indices(), select_random(20, 5, 12).design.indices());
}

TEST(Random, UniformFrequencies) {
  const Index n = 10;
  const int seeds = 100000;
  std::vector<int> count(n, 0);
  for (int s = 0; s < seeds; ++s) ++count[select_random(n, 1, s).design[0]];
  const double p = 1.0 / n;
  const double sd = std::sqrt(seeds * p * (1 - p));
  for (Index i = 0; i < n; ++i) EXPECT_NEAR(count[i], seeds * p, 3 * sd) << "index " << i;
}

TEST(Exhaustive, Examples) {
  std::mt19937_64 rng(13);
  LinearGaussianModel m = random_lg(4, 2, rng);
  EXPECT_EQ(select_exhaustive(m, 4).indices(), (std::vector<Index>{0, 1, 2, 3}));

  Vector sy(6), se(6);
  sy << 2.0, 5.0, 3.0, 1.5, 4.0, 9.0;
  se << 1.0, 2.0, 0.5, 1.0, 1.0, 4.0;
  GaussianInformation diag(SymMatrix::diagonal(sy), SymMatrix::diagonal(se));
  EXPECT_EQ(select_exhaustive(diag, 2).indices(), (std::vector<Index>{2, 4}));

  EXPECT_EQ(binomial_coefficient(50, 25), 126410606437752.0);
  try {
    select_exhaustive(GaussianInformation(SymMatrix::identity(40), SymMatrix::identity(40)), 10);
    FAIL() << "expected a budget error";
  } catch (const BudgetExceededError& e) {
    EXPECT_EQ(e.count(), binomial_coefficient(40, 10));
  }
}

TEST(Exhaustive, DominatesGreedy) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 20; ++t) {
    LinearGaussianModel m = random_lg(9, 4, rng);
    GaussianInformation info = closed_form_information(m);
    Design best = select_exhaustive(info, 3);
    SelectorReport g = select_gauss_greedy(info.marginal(), info.conditional(), 3);
    EXPECT_GE(info(best.indices()) - info(g.design.indices()), -1e-12);
  }
}
