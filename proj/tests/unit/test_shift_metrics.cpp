#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "specshift/error.hpp"
#include "specshift/shift_metrics.hpp"

using namespace specshift;

namespace {

std::vector<double> random_distribution(std::size_t n, std::mt19937_64& rng, bool sparse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) {
    x = (sparse && u(rng) < 0.4) ? 0.0 : u(rng);
    total += x;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& x : p) x /= total;
  return p;
}

AmplitudePanel random_panel(std::size_t n, std::size_t k, std::size_t c, std::uint64_t seed,
                            double offset = 0.0) {
  AmplitudePanel p(n, k, c);
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(2.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t ch = 0; ch < c; ++ch) p.at(i, b, ch) = offset + g(rng);
  return p;
}

}  // namespace

TEST(Histograms, IdenticalSamplesGiveEqualMasses) {
  const auto a = oracle::random_vector(30, 1);
  const auto [p, q] = paired_histograms(a, a, 7);
  EXPECT_EQ(p, q);
}

TEST(Histograms, DisjointTwoBins) {
  const std::vector<double> a{0, 0}, b{1, 1};
  const auto [p, q] = paired_histograms(a, b, 2);
  EXPECT_EQ(p, (std::vector<double>{1, 0}));
  EXPECT_EQ(q, (std::vector<double>{0, 1}));
}

TEST(Histograms, DegenerateRangeIsPointMassInFirstBin) {
  const std::vector<double> a{3, 3, 3}, b{3};
  const auto [p, q] = paired_histograms(a, b, 4);
  EXPECT_EQ(p, (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(q, p);
}

TEST(Histograms, MatchOracleOnUnionRange) {
  const auto a = oracle::random_vector(200, 2), b = oracle::random_vector(150, 3, 2.0);
  const auto [p, q] = paired_histograms(a, b, 50);
  double lo = a[0], hi = a[0];
  for (const auto* s : {&a, &b})
    for (double v : *s) lo = std::min(lo, v), hi = std::max(hi, v);
  const auto rp = oracle::histogram(a, lo, hi, 50), rq = oracle::histogram(b, lo, hi, 50);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(p[i], rp[i], 1e-12);
    EXPECT_NEAR(q[i], rq[i], 1e-12);
  }
}

TEST(Histograms, RejectsEmptyInputAndTooFewBins) {
  const std::vector<double> a{1, 2}, empty;
  EXPECT_THROW(paired_histograms(a, empty), Error);
  EXPECT_THROW(paired_histograms(empty, a), Error);
  EXPECT_THROW(paired_histograms(a, a, 1), Error);
}

TEST(Jsd2, HandValues) {
  const std::vector<double> p{0.5, 0.5}, q{1, 0}, a{1, 0}, b{0, 1};
  EXPECT_EQ(jsd2(p, p), 0.0);
  EXPECT_NEAR(jsd2(a, b), 1.0, 1e-15);
  const double ref = oracle::jsd2(p, q);
  EXPECT_NEAR(ref, 0.31128, 1e-5);
  EXPECT_NEAR(jsd2(p, q), ref, 1e-12);
}

TEST(Jsd2, RejectsInvalidDistributions) {
  const std::vector<double> ok{0.5, 0.5}, unnormalized{0.5, 0.6}, negative{1.5, -0.5},
      shorter{1.0};
  EXPECT_THROW(jsd2(ok, unnormalized), Error);
  EXPECT_THROW(jsd2(negative, ok), Error);
  EXPECT_THROW(jsd2(ok, shorter), Error);
}

TEST(Jsd2, BoundsSymmetryAndOracle) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 20);
    const auto p = random_distribution(n, rng, trial % 2 == 0);
    const auto q = random_distribution(n, rng, trial % 3 == 0);
    const double d = jsd2(p, q);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
    ASSERT_EQ(d, jsd2(q, p));
    ASSERT_NEAR(d, oracle::jsd2(p, q), 1e-12);
  }
}

TEST(Jsd2, InvariantUnderJointPermutation) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_distribution(9, rng, true), q = random_distribution(9, rng, false);
    const double before = jsd2(p, q);
    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pp(9), qq(9);
    for (std::size_t i = 0; i < 9; ++i) pp[i] = p[perm[i]], qq[i] = q[perm[i]];
    ASSERT_NEAR(jsd2(pp, qq), before, 1e-14);
  }
}

TEST(Ks, HandValues) {
  const std::vector<double> a{1, 2, 3, 4}, b{3, 4, 5, 6};
  EXPECT_EQ(ks(a, a), 0.0);
  EXPECT_EQ(ks(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1, 1}), 1.0);
  EXPECT_NEAR(oracle::ks(a, b), 0.5, 1e-15);
  EXPECT_NEAR(ks(a, b), 0.5, 1e-15);
  EXPECT_THROW(ks(a, std::vector<double>{}), Error);
}

TEST(Ks, BoundsSymmetryAndOracle) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t na = 1 + static_cast<std::size_t>(trial % 17);
    const std::size_t nb = 1 + static_cast<std::size_t>((trial * 7) % 23);
    std::vector<double> a(na), b(nb);
    // Coarse integers exercise ties.
    for (auto& v : a) v = trial % 2 ? coarse(rng) : oracle::random_vector(1, rng())[0];
    for (auto& v : b) v = trial % 2 ? coarse(rng) : oracle::random_vector(1, rng())[0];
    const double d = ks(a, b);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
    ASSERT_EQ(d, ks(b, a));
    ASSERT_NEAR(d, oracle::ks(a, b), 1e-12);
  }
}

TEST(Ks, InvariantUnderMonotoneTransform) {
  const auto a = oracle::random_vector(40, 1), b = oracle::random_vector(33, 2, 1.5);
  std::vector<double> ta, tb;
  for (double v : a) ta.push_back(std::exp(v) + v * v * v);
  for (double v : b) tb.push_back(std::exp(v) + v * v * v);
  EXPECT_EQ(ks(a, b), ks(ta, tb));
}

TEST(ShiftReport, IdenticalPanelsAreZero) {
  const auto p = random_panel(30, 5, 2, 1);
  const auto r = shift_report(p, p);
  EXPECT_EQ(r.jsd2.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.ks.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.mean_jsd2, 0.0);
  EXPECT_EQ(r.train_samples, 30u);
  EXPECT_EQ(r.histogram_bins, kDefaultHistogramBins);
}

TEST(ShiftReport, LargeOffsetSeparatesEveryCell) {
  const auto train = random_panel(25, 4, 3, 2);
  const auto test = random_panel(15, 4, 3, 3, 1000.0);
  const auto r = shift_report(train, test, 10);
  EXPECT_EQ(r.ks, Matrix::Ones(4, 3));
  EXPECT_NEAR(r.jsd2.minCoeff(), 1.0, 1e-12);
  EXPECT_EQ(r.test_samples, 15u);
}

TEST(ShiftReport, MatchesBruteForceAndAggregates) {
  const auto train = random_panel(2, 3, 2, 5);
  const auto test = random_panel(2, 3, 2, 6);
  const auto r = shift_report(train, test, 4);
  double sj = 0.0, sk = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto a = train.column(k, c), b = test.column(k, c);
      double lo = a[0], hi = a[0];
      for (const auto* s : {&a, &b})
        for (double v : *s) lo = std::min(lo, v), hi = std::max(hi, v);
      const double j = oracle::jsd2(oracle::histogram(a, lo, hi, 4), oracle::histogram(b, lo, hi, 4));
      const auto ki = static_cast<Eigen::Index>(k), ci = static_cast<Eigen::Index>(c);
      EXPECT_NEAR(r.jsd2(ki, ci), j, 1e-12);
      EXPECT_NEAR(r.ks(ki, ci), oracle::ks(a, b), 1e-12);
      sj += r.jsd2(ki, ci);
      sk += r.ks(ki, ci);
    }
  }
  EXPECT_NEAR(r.mean_jsd2, sj / 6, 1e-15);
  EXPECT_NEAR(r.mean_ks, sk / 6, 1e-15);
}

TEST(ShiftReport, RejectsMismatchedPanels) {
  EXPECT_THROW(shift_report(random_panel(5, 3, 2, 1), random_panel(5, 4, 2, 1)), Error);
  EXPECT_THROW(shift_report(random_panel(5, 3, 2, 1), random_panel(5, 3, 1, 1)), Error);
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_EQ(percentile({1, 2, 3, 4, 5}, 50), 3.0);
  EXPECT_NEAR(percentile({4, 1, 3, 2}, 60), 2.8, 1e-12);  // rank 0.6 * 3 = 1.8
  EXPECT_EQ(percentile({7}, 60), 7.0);
  EXPECT_EQ(percentile({1, 9}, 0), 1.0);
  EXPECT_EQ(percentile({1, 9}, 100), 9.0);
  EXPECT_THROW(percentile({}, 50), Error);
  EXPECT_THROW(percentile({1, 2}, 101), Error);
}
