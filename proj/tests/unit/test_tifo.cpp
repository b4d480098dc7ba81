#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "specshift/error.hpp"
#include "specshift/spectral.hpp"
#include "specshift/tifo.hpp"

using namespace specshift;

namespace {

FrequencyWeights constant_weights(std::size_t bins, std::size_t channels, double v) {
  const auto k = static_cast<Eigen::Index>(bins);
  const auto c = static_cast<Eigen::Index>(channels);
  return {Matrix::Constant(k, c, v), Matrix::Constant(k, c, v)};
}

StabilityScores make_scores(const Matrix& values) {
  StabilityScores s;
  s.values = values;
  s.sample_count = 10;
  return s;
}

StabilityScores random_scores(std::size_t bins, std::size_t channels, std::uint64_t seed) {
  Matrix v = oracle::random_matrix(static_cast<Eigen::Index>(bins),
                                   static_cast<Eigen::Index>(channels), seed)
                 .cwiseAbs() *
             3.0;
  return make_scores(v);
}

void perturb_output_layer(TifoParams& p, std::uint64_t seed) {
  p.real.w2 = oracle::random_matrix(p.real.w2.rows(), p.real.w2.cols(), seed, 0.2);
  p.imag.w2 = oracle::random_matrix(p.imag.w2.rows(), p.imag.w2.cols(), seed + 1, 0.2);
}

}  // namespace

TEST(InitTifo, SameSeedIsBitIdentical) {
  auto a = init_tifo(9, 2, 16, 42);
  auto b = init_tifo(9, 2, 16, 42);
  const auto pa = a.params(), pb = b.params();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i].value, *pb[i].value);
}

TEST(InitTifo, DifferentSeedsDiffer) {
  auto a = init_tifo(9, 2, 16, 1);
  auto b = init_tifo(9, 2, 16, 2);
  EXPECT_NE(a.real.w1, b.real.w1);
}

TEST(InitTifo, StartsAsIdentityOperator) {
  const auto p = init_tifo(9, 3, 16, 5);
  const auto w = weights(p, random_scores(9, 3, 1));
  EXPECT_EQ(w.real, Matrix::Ones(9, 3));
  EXPECT_EQ(w.imag, Matrix::Ones(9, 3));
}

TEST(InitTifo, FirstLayerBound) {
  const auto p = init_tifo(9, 1, 16, 5);
  const double a = std::sqrt(6.0 / (9 + 16));
  EXPECT_LE(p.real.w1.cwiseAbs().maxCoeff(), a);
  EXPECT_LE(p.imag.w1.cwiseAbs().maxCoeff(), a);
}

TEST(InitTifo, TensorNames) {
  auto p = init_tifo(5, 1, 4, 0);
  std::vector<std::string> names;
  for (const auto& t : p.params()) names.push_back(t.name);
  EXPECT_EQ(names, (std::vector<std::string>{"mlp_r.w1", "mlp_r.b1", "mlp_r.w2", "mlp_r.b2",
                                             "mlp_i.w1", "mlp_i.b1", "mlp_i.w2", "mlp_i.b2"}));
}

TEST(Weights, ZeroedWeightsWithUnitBiasGiveOnes) {
  auto p = init_tifo(5, 2, 8, 3);
  p.real.w1.setZero();
  p.imag.w1.setZero();
  const auto w = weights(p, random_scores(5, 2, 4));
  EXPECT_EQ(w.real, Matrix::Ones(5, 2));
  EXPECT_EQ(w.imag, Matrix::Ones(5, 2));
}

TEST(Weights, IdenticalScoreColumnsGiveIdenticalWeights) {
  auto p = init_tifo(6, 2, 8, 3);
  perturb_output_layer(p, 10);
  Matrix s = random_scores(6, 1, 2).values;
  Matrix both(6, 2);
  both << s, s;
  const auto w = weights(p, make_scores(both));
  EXPECT_EQ(w.real.col(0), w.real.col(1));
  EXPECT_EQ(w.imag.col(0), w.imag.col(1));
}

TEST(Weights, ChannelPermutationPermutesColumns) {
  auto p = init_tifo(6, 3, 8, 3);
  perturb_output_layer(p, 11);
  const auto s = random_scores(6, 3, 5);
  Matrix permuted(6, 3);
  permuted << s.values.col(2), s.values.col(0), s.values.col(1);
  const auto w = weights(p, s);
  const auto wp = weights(p, make_scores(permuted));
  EXPECT_EQ(wp.real.col(0), w.real.col(2));
  EXPECT_EQ(wp.real.col(1), w.real.col(0));
  EXPECT_EQ(wp.imag.col(2), w.imag.col(1));
}

TEST(Weights, HandForwardOneHiddenUnit) {
  TifoInitOptions raw_linear{ScoreInput::raw, WeightActivation::linear};
  auto p = init_tifo(2, 1, 1, 0, raw_linear);
  p.real.w1 << 0.5, -1.0;
  p.real.b1 << 2.0;
  p.real.w2 << 3.0, -2.0;
  p.real.b2 << 1.0, 0.5;
  p.imag = p.real;
  p.imag.b1 << -2.0;  // pushes the hidden unit below zero
  Matrix s(2, 1);
  s << 1.0, 2.0;
  // Real plane: h = relu(0.5*1 - 1*2 + 2) = 0.5, out = [3*0.5 + 1, -2*0.5 + 0.5].
  // Imag plane: h = relu(0.5 - 2 - 2) = 0, out = b2.
  const auto w = weights(p, make_scores(s));
  EXPECT_NEAR(w.real(0, 0), 2.5, 1e-15);
  EXPECT_NEAR(w.real(1, 0), -0.5, 1e-15);
  EXPECT_NEAR(w.imag(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(w.imag(1, 0), 0.5, 1e-15);

  p.activation = WeightActivation::relu;
  EXPECT_NEAR(weights(p, make_scores(s)).real(1, 0), 0.0, 1e-15);
  p.activation = WeightActivation::linear;
  p.input = ScoreInput::log1p;
  // h = relu(0.5*log 2 - log 3 + 2)
  const double h = 0.5 * std::log(2.0) - std::log(3.0) + 2.0;
  EXPECT_NEAR(weights(p, make_scores(s)).real(0, 0), 3 * h + 1, 1e-14);
}

TEST(Weights, RejectsShapeMismatch) {
  const auto p = init_tifo(5, 2, 4, 0);
  EXPECT_THROW(weights(p, random_scores(4, 2, 1)), Error);
  EXPECT_THROW(weights(p, random_scores(5, 3, 1)), Error);
}

TEST(Transform, OnesIsIdentity) {
  const Matrix x = oracle::random_matrix(37, 2, 3);
  const Matrix y = transform(x, constant_weights(19, 2, 1.0));
  EXPECT_LE((y - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Transform, IdentityForEveryLengthUpTo512) {
  for (std::size_t n = 2; n <= 512; n += (n < 40 ? 1 : 29)) {
    const Matrix x = oracle::random_matrix(static_cast<Eigen::Index>(n), 1, n);
    const Matrix y = transform(x, constant_weights(bin_count(n), 1, 1.0));
    ASSERT_LE((y - x).cwiseAbs().maxCoeff(), 1e-10) << n;
  }
}

TEST(Transform, ZerosGiveZeros) {
  const Matrix x = oracle::random_matrix(16, 1, 3);
  EXPECT_EQ(transform(x, constant_weights(9, 1, 0.0)), Matrix::Zero(16, 1));
}

TEST(Transform, DcOnlyWeights) {
  Matrix x(4, 1);
  x << 1, 2, 3, 4;
  FrequencyWeights w = constant_weights(3, 1, 0.0);
  w.real(0, 0) = w.imag(0, 0) = 1.0;
  const Matrix y = transform(x, w);
  EXPECT_LE((y.array() - 2.5).abs().maxCoeff(), 1e-12);
}

TEST(Transform, MatchesOracleOnRandomWeights) {
  const std::size_t n = 15;
  const Matrix x = oracle::random_matrix(n, 1, 4);
  const auto wr = oracle::random_vector(8, 5);
  const auto wi = oracle::random_vector(8, 6);
  FrequencyWeights w{Matrix(8, 1), Matrix(8, 1)};
  for (Eigen::Index k = 0; k < 8; ++k) {
    w.real(k, 0) = wr[static_cast<std::size_t>(k)];
    w.imag(k, 0) = wi[static_cast<std::size_t>(k)];
  }
  const auto spec = oracle::dft({x.data(), x.data() + n});
  std::vector<oracle::cd> half(8);
  for (std::size_t k = 0; k < 8; ++k) half[k] = {spec[k].real() * wr[k], spec[k].imag() * wi[k]};
  const auto ref = oracle::idft_half(half, n);
  const Matrix y = transform(x, w);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y(static_cast<Eigen::Index>(i), 0), ref[i], 1e-12);
}

TEST(Transform, LinearInInput) {
  const Matrix x = oracle::random_matrix(24, 2, 1);
  const Matrix z = oracle::random_matrix(24, 2, 2);
  FrequencyWeights w{oracle::random_matrix(13, 2, 3), oracle::random_matrix(13, 2, 4)};
  const Matrix lhs = transform(1.5 * x - 2.0 * z, w);
  const Matrix rhs = 1.5 * transform(x, w) - 2.0 * transform(z, w);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Transform, RejectsShapeMismatch) {
  const Matrix x = oracle::random_matrix(16, 2, 1);
  EXPECT_THROW(transform(x, constant_weights(8, 2, 1.0)), Error);
  EXPECT_THROW(transform(x, constant_weights(9, 1, 1.0)), Error);
}

TEST(TransformVjp, ZeroUpstreamGivesZeroGrads) {
  const Matrix x = oracle::random_matrix(8, 1, 1);
  FrequencyWeights w{oracle::random_matrix(5, 1, 2), oracle::random_matrix(5, 1, 3)};
  const auto g = transform_vjp(x, w, Matrix::Zero(8, 1));
  EXPECT_EQ(g.x, Matrix::Zero(8, 1));
  EXPECT_EQ(g.lambda_r, Matrix::Zero(5, 1));
  EXPECT_EQ(g.lambda_i, Matrix::Zero(5, 1));
}

TEST(TransformVjp, IdentityWeightsPassUpstreamThrough) {
  const Matrix x = oracle::random_matrix(8, 2, 1);
  const Matrix up = oracle::random_matrix(8, 2, 2);
  const auto g = transform_vjp(x, constant_weights(5, 2, 1.0), up);
  EXPECT_LE((g.x - up).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TransformVjp, MatchesCentralDifferences) {
  for (WindowKind window : {WindowKind::rectangular, WindowKind::hann}) {
    for (std::size_t keep : {0u, 3u}) {
      SpectralOptions opts{window, keep};
      const Matrix x = oracle::random_matrix(8, 2, 1);
      const Matrix up = oracle::random_matrix(8, 2, 2);
      FrequencyWeights w{oracle::random_matrix(5, 2, 3), oracle::random_matrix(5, 2, 4)};
      const auto g = transform_vjp(x, w, up, opts);
      auto loss = [&](const Matrix& xx, const FrequencyWeights& ww) {
        return (transform(xx, ww, opts).array() * up.array()).sum();
      };
      const double h = 1e-5;
      auto check = [&](double analytic, double numeric) {
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
        EXPECT_LE(std::abs(analytic - numeric) / scale, 1e-6);
      };
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Matrix xp = x, xm = x;
        xp.data()[i] += h;
        xm.data()[i] -= h;
        check(g.x.data()[i], (loss(xp, w) - loss(xm, w)) / (2 * h));
      }
      for (Eigen::Index i = 0; i < w.real.size(); ++i) {
        FrequencyWeights wp = w, wm = w;
        wp.real.data()[i] += h;
        wm.real.data()[i] -= h;
        check(g.lambda_r.data()[i], (loss(x, wp) - loss(x, wm)) / (2 * h));
        wp = w;
        wm = w;
        wp.imag.data()[i] += h;
        wm.imag.data()[i] -= h;
        check(g.lambda_i.data()[i], (loss(x, wp) - loss(x, wm)) / (2 * h));
      }
    }
  }
}

TEST(TifoGradient, EndToEndMatchesFiniteDifferences) {
  // MSE(transform(x, weights(params, S)), target) at L = 8, h = 4.
  for (WeightActivation act : {WeightActivation::linear, WeightActivation::relu}) {
    auto p = init_tifo(5, 2, 4, 9, {ScoreInput::log1p, act});
    perturb_output_layer(p, 20);
    const auto s = random_scores(5, 2, 7);
    const Matrix x = oracle::random_matrix(8, 2, 8);
    const Matrix target = oracle::random_matrix(8, 2, 9);
    auto loss = [&](const TifoParams& q) {
      return (transform(x, weights(q, s)) - target).squaredNorm() / static_cast<double>(x.size());
    };
    const auto w = weights(p, s);
    const Matrix up = 2.0 * (transform(x, w) - target) / static_cast<double>(x.size());
    const auto tg = transform_vjp(x, w, up);
    TifoParams grad = p;
    for (const auto& t : grad.params()) t.value->setZero();
    weights_vjp(p, s, {tg.lambda_r, tg.lambda_i}, grad);

    auto params = p.params();
    auto grads = grad.params();
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (Eigen::Index i = 0; i < params[t].value->size(); ++i) {
        const double saved = params[t].value->data()[i];
        params[t].value->data()[i] = saved + h;
        const double up_loss = loss(p);
        params[t].value->data()[i] = saved - h;
        const double down_loss = loss(p);
        params[t].value->data()[i] = saved;
        const double numeric = (up_loss - down_loss) / (2 * h);
        const double analytic = grads[t].value->data()[i];
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-2});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
      }
    }
    EXPECT_LE(worst, 1e-5) << to_string(act);
  }
}

TEST(AlphaScale, EndsAndMidpoint) {
  FrequencyWeights w{Matrix::Constant(3, 2, 3.0), Matrix::Constant(3, 2, -1.0)};
  const auto one = alpha_scale(w, 1.0);
  EXPECT_EQ(one.real, w.real);
  EXPECT_EQ(one.imag, w.imag);
  const auto zero = alpha_scale(w, 0.0);
  EXPECT_EQ(zero.real, Matrix::Ones(3, 2));
  EXPECT_EQ(zero.imag, Matrix::Ones(3, 2));
  EXPECT_EQ(alpha_scale(w, 0.5).real(0, 0), 2.0);
  EXPECT_THROW(alpha_scale(w, -0.1), Error);
  EXPECT_THROW(alpha_scale(w, 1.5), Error);
}

TEST(AlphaScale, ZeroAlphaTransformIsIdentity) {
  const Matrix x = oracle::random_matrix(30, 3, 5);
  FrequencyWeights w{oracle::random_matrix(16, 3, 6), oracle::random_matrix(16, 3, 7)};
  EXPECT_LE((transform(x, alpha_scale(w, 0.0)) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TifoOptions, ParseNames) {
  EXPECT_EQ(parse_score_input("raw"), ScoreInput::raw);
  EXPECT_EQ(parse_weight_activation("linear"), WeightActivation::linear);
  EXPECT_THROW(parse_score_input("sqrt"), Error);
  EXPECT_THROW(parse_weight_activation("tanh"), Error);
}
