#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "specshift/adam.hpp"
#include "specshift/error.hpp"
#include "specshift/losses.hpp"
#include "specshift/models.hpp"

using namespace specshift;

TEST(MovingAverage, ConstantSeriesIsAllTrend) {
  const auto [trend, seasonal] = moving_average_decompose({4, 4, 4, 4, 4}, 3);
  EXPECT_EQ(trend, (std::vector<double>{4, 4, 4, 4, 4}));
  EXPECT_EQ(seasonal, (std::vector<double>{0, 0, 0, 0, 0}));
}

TEST(MovingAverage, KernelOneIsIdentity) {
  const std::vector<double> x{1, -2, 5};
  const auto [trend, seasonal] = moving_average_decompose(x, 1);
  EXPECT_EQ(trend, x);
  EXPECT_EQ(seasonal, (std::vector<double>{0, 0, 0}));
}

TEST(MovingAverage, HandEdgeReplication) {
  const auto [trend, seasonal] = moving_average_decompose({1, 2, 3, 4}, 3);
  const std::vector<double> expected{4.0 / 3, 2, 3, 11.0 / 3};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(trend[i], expected[i], 1e-15);
    EXPECT_NEAR(seasonal[i], static_cast<double>(i + 1) - expected[i], 1e-15);
  }
}

TEST(MovingAverage, RejectsEvenOrOversizedKernel) {
  EXPECT_THROW(moving_average_decompose({1, 2, 3, 4}, 2), Error);
  EXPECT_THROW(moving_average_decompose({1, 2, 3}, 5), Error);
}

TEST(MovingAverage, DecompositionIsExact) {
  for (std::size_t m : {1u, 3u, 5u, 25u}) {
    const auto x = oracle::random_vector(40, m, 3.0);
    const auto [trend, seasonal] = moving_average_decompose(x, m);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_LE(std::abs(trend[i] + seasonal[i] - x[i]), 1e-12);
  }
}

TEST(MovingAverage, MatrixMatchesDecomposition) {
  const auto x = oracle::random_vector(12, 3);
  const Matrix a = moving_average_matrix(12, 5);
  const auto [trend, seasonal] = moving_average_decompose(x, 5);
  const Vector tx = a * Eigen::Map<const Vector>(x.data(), 12);
  for (Eigen::Index i = 0; i < 12; ++i) EXPECT_NEAR(tx(i), trend[static_cast<std::size_t>(i)], 1e-14);
}

TEST(Backbone, ZeroWeightsOutputBias) {
  auto m = init_backbone({BackboneKind::linear, 5, 3, 1}, 0);
  m.weight.setZero();
  m.bias << 1, 2, 3;
  const Matrix y = backbone_forward(m, oracle::random_matrix(5, 1, 1));
  EXPECT_EQ(y, (Matrix(3, 1) << 1, 2, 3).finished());
}

TEST(Backbone, IdentityWeightsCopyInput) {
  auto m = init_backbone({BackboneKind::linear, 6, 6, 1}, 0);
  m.weight.setIdentity();
  m.bias.setZero();
  const Matrix x = oracle::random_matrix(6, 1, 2);
  EXPECT_EQ(backbone_forward(m, x), x);
}

TEST(Backbone, HandTwoByTwo) {
  auto m = init_backbone({BackboneKind::linear, 2, 2, 1}, 0);
  m.weight << 1, 0, 0, 2;
  m.bias << 1, 1;
  Matrix x(2, 1);
  x << 3, 4;
  EXPECT_EQ(backbone_forward(m, x), (Matrix(2, 1) << 4, 9).finished());
}

TEST(Backbone, RejectsWrongLength) {
  const auto m = init_backbone({BackboneKind::linear, 5, 3, 1}, 0);
  EXPECT_THROW(backbone_forward(m, Matrix::Zero(4, 1)), Error);
  EXPECT_THROW(backbone_forward(m, Matrix::Zero(5, 2)), Error);
}

TEST(Backbone, LinearInInput) {
  for (BackboneKind kind : {BackboneKind::linear, BackboneKind::dlinear}) {
    auto m = init_backbone({kind, 9, 4, 2, 3}, 3);
    m.bias.setZero();
    if (kind == BackboneKind::dlinear) {
      m.trend_bias.setZero();
      m.weight = oracle::random_matrix(8, 9, 4);
    }
    const Matrix x = oracle::random_matrix(9, 2, 1), z = oracle::random_matrix(9, 2, 2);
    const Matrix lhs = backbone_forward(m, 2.0 * x - 3.0 * z);
    const Matrix rhs = 2.0 * backbone_forward(m, x) - 3.0 * backbone_forward(m, z);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Backbone, DLinearMatchesHeadsOnDecomposition) {
  auto m = init_backbone({BackboneKind::dlinear, 7, 3, 1, 3}, 5);
  m.weight = oracle::random_matrix(3, 7, 1);
  m.trend_weight = oracle::random_matrix(3, 7, 2);
  const auto x = oracle::random_vector(7, 3);
  const auto [trend, seasonal] = moving_average_decompose(x, 3);
  const Vector expected = m.trend_weight * Eigen::Map<const Vector>(trend.data(), 7) +
                          m.weight * Eigen::Map<const Vector>(seasonal.data(), 7) +
                          m.bias.row(0).transpose() + m.trend_bias.row(0).transpose();
  const Matrix y = backbone_forward(m, Eigen::Map<const Matrix>(x.data(), 7, 1));
  EXPECT_LE((y.col(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BackboneVjp, ZeroUpstreamGivesZeroGrads) {
  const auto m = init_backbone({BackboneKind::dlinear, 6, 3, 2, 3}, 1);
  const auto g = backbone_vjp(m, oracle::random_matrix(6, 2, 1), Matrix::Zero(3, 2));
  EXPECT_EQ(g.x, Matrix::Zero(6, 2));
  EXPECT_EQ(g.params.weight, Matrix::Zero(6, 6));
  EXPECT_EQ(g.params.trend_weight, Matrix::Zero(6, 6));
}

TEST(BackboneVjp, HandOuterProduct) {
  const auto m = init_backbone({BackboneKind::linear, 2, 2, 1}, 0);
  Matrix x(2, 1), up(2, 1);
  x << 3, 4;
  up << 1, -2;
  const auto g = backbone_vjp(m, x, up);
  EXPECT_EQ(g.params.weight, (Matrix(2, 2) << 3, 4, -6, -8).finished());
  EXPECT_EQ(g.params.bias, (Matrix(1, 2) << 1, -2).finished());
}

TEST(BackboneVjp, MatchesFiniteDifferences) {
  for (BackboneKind kind : {BackboneKind::linear, BackboneKind::dlinear}) {
    for (bool shared : {false, true}) {
      auto m = init_backbone({kind, 8, 4, 2, 3, shared}, 2);
      const Matrix x = oracle::random_matrix(8, 2, 3), y = oracle::random_matrix(4, 2, 4);
      auto loss = [&](const BackboneParams& p, const Matrix& xx) {
        return mse(backbone_forward(p, xx), y);
      };
      auto g = backbone_vjp(m, x, mse_grad(backbone_forward(m, x), y, 8.0));
      const double h = 1e-5;
      auto rel = [](double a, double n) {
        return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-7});
      };
      auto params = m.params();
      const auto grads = g.params.params();
      for (std::size_t t = 0; t < params.size(); ++t) {
        for (Eigen::Index i = 0; i < params[t].value->size(); ++i) {
          const double saved = params[t].value->data()[i];
          params[t].value->data()[i] = saved + h;
          const double up = loss(m, x);
          params[t].value->data()[i] = saved - h;
          const double down = loss(m, x);
          params[t].value->data()[i] = saved;
          ASSERT_LE(rel(grads[t].value->data()[i], (up - down) / (2 * h)), 1e-6) << params[t].name;
        }
      }
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Matrix xp = x, xm = x;
        xp.data()[i] += h;
        xm.data()[i] -= h;
        ASSERT_LE(rel(g.x.data()[i], (loss(m, xp) - loss(m, xm)) / (2 * h)), 1e-6);
      }
    }
  }
}

TEST(Backbone, SharedHeadHasOneBlock) {
  auto m = init_backbone({BackboneKind::linear, 5, 3, 4, 25, true}, 0);
  EXPECT_EQ(m.weight.rows(), 3);
  EXPECT_EQ(m.params()[0].shape, (std::vector<std::size_t>{1, 3, 5}));
}

TEST(Backbone, DLinearFitsLinearTrend) {
  // Capacity check: ramps with random offset and slope, 500 Adam steps.
  const std::size_t L = 16, H = 4;
  auto m = init_backbone({BackboneKind::dlinear, L, H, 1, 5}, 0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix x(L, 64), y(H, 64);
  for (Eigen::Index j = 0; j < 64; ++j) {
    const double a = u(rng), b = 0.2 * u(rng);
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(L + H); ++t) {
      const double v = a + b * static_cast<double>(t);
      if (t < static_cast<Eigen::Index>(L)) x(t, j) = v; else y(t - static_cast<Eigen::Index>(L), j) = v;
    }
  }
  auto params = m.params();
  AdamState adam = adam_init(params);
  double loss = 0.0;
  for (int step = 0; step < 500; ++step) {
    BackboneParams g = zeros_like(m);
    const Matrix pred = backbone_forward_channel(m, 0, x);
    loss = mse(pred, y);
    backbone_vjp_channel(m, 0, x, mse_grad(pred, y, static_cast<double>(y.size())), g, nullptr);
    adam_step(params, g.params(), adam, 1e-2);
  }
  EXPECT_LT(loss, 1e-3);
}

TEST(Losses, MseAndMae) {
  Matrix a(2, 1), z = Matrix::Zero(2, 1);
  a << 1, 2;
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(mse(a, z), 2.5);
  EXPECT_EQ(mae(a, a), 0.0);
  EXPECT_EQ(mae(a, z), 1.5);
  EXPECT_DOUBLE_EQ(mse(3.0 * a, 3.0 * z), 9.0 * mse(a, z));
  EXPECT_THROW(mse(a, Matrix::Zero(3, 1)), Error);
  EXPECT_THROW(mae(a, Matrix::Zero(1, 2)), Error);
}

TEST(Losses, MaeBoundedByRootMse) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix a = oracle::random_matrix(7, 3, seed), b = oracle::random_matrix(7, 3, seed + 100);
    ASSERT_LE(mae(a, b), std::sqrt(mse(a, b)) + 1e-15);
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Matrix w = oracle::random_matrix(3, 2, 1), g = Matrix::Zero(3, 2);
  const Matrix before = w;
  std::vector<ParamRef> p{{"w", {3, 2}, &w}}, gr{{"w", {3, 2}, &g}};
  AdamState s = adam_init(p);
  EXPECT_TRUE(adam_step(p, gr, s, 0.1));
  EXPECT_EQ(w, before);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstSign) {
  Matrix w = Matrix::Zero(1, 3), g(1, 3);
  g << 0.5, -3.0, 1e-3;
  std::vector<ParamRef> p{{"w", {1, 3}, &w}}, gr{{"w", {1, 3}, &g}};
  AdamState s = adam_init(p);
  adam_step(p, gr, s, 0.01);
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double expected = -0.01 * g(0, i) / (std::abs(g(0, i)) + 1e-8);
    EXPECT_NEAR(w(0, i), expected, 1e-15);
    EXPECT_NEAR(std::abs(w(0, i)), 0.01, 1e-7);
  }
}

TEST(Adam, DeterministicAndRejectsNonFinite) {
  auto run = [] {
    Matrix w = oracle::random_matrix(2, 2, 3), g = oracle::random_matrix(2, 2, 4);
    std::vector<ParamRef> p{{"w", {2, 2}, &w}}, gr{{"w", {2, 2}, &g}};
    AdamState s = adam_init(p);
    for (int i = 0; i < 5; ++i) adam_step(p, gr, s, 0.05);
    return w;
  };
  EXPECT_EQ(run(), run());

  Matrix w = Matrix::Ones(1, 2), g(1, 2);
  g << 1.0, std::numeric_limits<double>::infinity();
  std::vector<ParamRef> p{{"w", {1, 2}, &w}}, gr{{"w", {1, 2}, &g}};
  AdamState s = adam_init(p);
  EXPECT_FALSE(adam_step(p, gr, s, 0.1));
  EXPECT_EQ(s.rejected, 1u);
  EXPECT_EQ(s.step, 0u);
  EXPECT_EQ(w, Matrix::Ones(1, 2));
}
