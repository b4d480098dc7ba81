#include "specshift/san.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "specshift/adam.hpp"
#include "specshift/data.hpp"
#include "specshift/error.hpp"

namespace specshift {

namespace {

Matrix softplus(const Matrix& z) {
  return z.unaryExpr([](double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); });
}

Matrix sigmoid(const Matrix& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

SanNet init_net(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  SanNet n;
  const auto hid = static_cast<Eigen::Index>(kSanHidden);
  n.w1.resize(hid, static_cast<Eigen::Index>(in));
  n.b1 = Matrix::Zero(hid, 1);
  n.w2.resize(static_cast<Eigen::Index>(out), hid);
  n.b2 = Matrix::Zero(static_cast<Eigen::Index>(out), 1);
  fill_uniform(n.w1, std::sqrt(6.0 / static_cast<double>(in + kSanHidden)), rng);
  fill_uniform(n.w2, std::sqrt(6.0 / static_cast<double>(kSanHidden + out)), rng);
  return n;
}

struct NetCache {
  Matrix pre;     // hidden pre-activation
  Matrix hidden;  // relu(pre)
};

Matrix net_forward(const SanNet& n, const Matrix& in, NetCache& cache) {
  cache.pre = (n.w1 * in).colwise() + n.b1.col(0);
  cache.hidden = cache.pre.cwiseMax(0.0);
  return (n.w2 * cache.hidden).colwise() + n.b2.col(0);
}

void net_vjp(const SanNet& n, const Matrix& in, const NetCache& cache,
             const Matrix& upstream, SanNet& grad) {
  grad.w2 += upstream * cache.hidden.transpose();
  grad.b2 += upstream.rowwise().sum();
  const Matrix dh =
      (n.w2.transpose() * upstream).cwiseProduct((cache.pre.array() > 0.0).cast<double>().matrix());
  grad.w1 += dh * in.transpose();
  grad.b1 += dh.rowwise().sum();
}

SanNet zero_net(const SanNet& n) {
  return {Matrix::Zero(n.w1.rows(), n.w1.cols()), Matrix::Zero(n.b1.rows(), 1),
          Matrix::Zero(n.w2.rows(), n.w2.cols()), Matrix::Zero(n.b2.rows(), 1)};
}

std::vector<ParamRef> net_params(SanNet& n, const std::string& p) {
  auto sh = [](const Matrix& m) {
    return std::vector<std::size_t>{static_cast<std::size_t>(m.rows()),
                                    static_cast<std::size_t>(m.cols())};
  };
  return {{p + "w1", sh(n.w1), &n.w1},
          {p + "b1", {static_cast<std::size_t>(n.b1.rows())}, &n.b1},
          {p + "w2", sh(n.w2), &n.w2},
          {p + "b2", {static_cast<std::size_t>(n.b2.rows())}, &n.b2}};
}

struct Stage1Batch {
  PatchStats in;
  PatchStats target;
};

// Loss and, when grad is non-null, its gradient for one batch.
double stage1_loss(const SanState& s, const Stage1Batch& b, SanState* grad) {
  const Matrix ref = b.in.mean.colwise().mean();
  const Matrix mean_in = b.in.mean.rowwise() - ref.row(0);
  NetCache mc, vc;
  const Matrix mean_out = net_forward(s.mean_net, mean_in, mc).rowwise() + ref.row(0);
  const Matrix z = net_forward(s.var_net, b.in.var, vc);
  const Matrix var_out = softplus(z);
  const double count = static_cast<double>(mean_out.size());
  const Matrix dm = mean_out - b.target.mean;
  const Matrix dv = var_out - b.target.var;
  const double loss = dm.squaredNorm() / count + dv.squaredNorm() / count;
  if (grad != nullptr) {
    net_vjp(s.mean_net, mean_in, mc, (2.0 / count) * dm, grad->mean_net);
    net_vjp(s.var_net, b.in.var, vc, ((2.0 / count) * dv).cwiseProduct(sigmoid(z)),
            grad->var_net);
  }
  return loss;
}

}  // namespace

std::vector<ParamRef> SanState::params(std::string_view prefix) {
  const std::string p(prefix);
  auto out = net_params(mean_net, p + "mean.");
  auto v = net_params(var_net, p + "var.");
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

void check_san_patch(std::size_t lookback, std::size_t horizon, std::size_t patch) {
  require(patch >= 1, "patch length must be >= 1");
  if (lookback % patch == 0 && horizon % patch == 0) return;
  const std::size_t g = std::gcd(lookback, horizon);
  std::size_t best = 1;
  for (std::size_t d = 1; d <= g; ++d) {
    if (g % d != 0) continue;
    const auto dist = [patch](std::size_t v) { return v > patch ? v - patch : patch - v; };
    if (dist(d) < dist(best) || (dist(d) == dist(best) && d > best)) best = d;
  }
  require(false, "patch length " + std::to_string(patch) + " must divide L=" +
                     std::to_string(lookback) + " and H=" + std::to_string(horizon) +
                     "; try patch=" + std::to_string(best));
}

SanState san_init(std::size_t lookback, std::size_t horizon, std::size_t patch,
                  std::uint64_t seed) {
  require(lookback >= 1 && horizon >= 1, "L and H must be >= 1");
  check_san_patch(lookback, horizon, patch);
  SanState s;
  s.lookback = lookback;
  s.horizon = horizon;
  s.patch = patch;
  auto rng = make_rng(seed, "san.init");
  s.mean_net = init_net(s.input_patches(), s.output_patches(), rng);
  s.var_net = init_net(s.input_patches(), s.output_patches(), rng);
  // Variance output starts near softplus(1) rather than at a tiny value.
  s.var_net.b2.setOnes();
  return s;
}

PatchStats patch_stats(const MatrixRef& x, std::size_t patch) {
  require(patch >= 1 && x.rows() % static_cast<Eigen::Index>(patch) == 0,
          "series length must be a multiple of the patch length");
  const auto p = static_cast<Eigen::Index>(patch);
  const Eigen::Index n = x.rows() / p;
  PatchStats s{Matrix(n, x.cols()), Matrix(n, x.cols())};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto block = x.middleRows(j * p, p);
    const Eigen::RowVectorXd m = block.colwise().mean();
    s.mean.row(j) = m;
    s.var.row(j) = (block.rowwise() - m).array().square().colwise().mean().matrix();
  }
  return s;
}

PatchStats san_predict(const SanState& state, const PatchStats& input) {
  require(static_cast<std::size_t>(input.mean.rows()) == state.input_patches(),
          "input statistics do not match the predictor");
  const Matrix ref = input.mean.colwise().mean();
  NetCache c;
  PatchStats out;
  out.mean = net_forward(state.mean_net, input.mean.rowwise() - ref.row(0), c).rowwise() +
             ref.row(0);
  out.var = softplus(net_forward(state.var_net, input.var, c));
  return out;
}

SanState san_stage1_train(const WindowedDataset& data, std::size_t patch,
                          std::size_t epochs, const SanTrainOptions& options) {
  SanState s = san_init(data.lookback(), data.horizon(), patch, options.seed);
  require(options.batch_size >= 1, "batch size must be >= 1");

  // Every (train window, channel) pair is one stage-1 sample.
  const auto train = indices_of(data, Split::train);
  require(!train.empty(), "train split is empty");
  std::vector<std::pair<std::size_t, std::size_t>> samples;
  for (std::size_t c = 0; c < data.channels(); ++c) {
    for (std::size_t i : train) samples.emplace_back(i, c);
  }

  auto make_batch = [&](std::size_t begin, std::size_t end) {
    const auto b = static_cast<Eigen::Index>(end - begin);
    Matrix x(static_cast<Eigen::Index>(data.lookback()), b);
    Matrix y(static_cast<Eigen::Index>(data.horizon()), b);
    for (Eigen::Index j = 0; j < b; ++j) {
      const auto [i, c] = samples[begin + static_cast<std::size_t>(j)];
      x.col(j) = data.input(i).col(static_cast<Eigen::Index>(c));
      y.col(j) = data.target(i).col(static_cast<Eigen::Index>(c));
    }
    return Stage1Batch{patch_stats(x, patch), patch_stats(y, patch)};
  };

  auto full_loss = [&]() {
    double total = 0.0;
    for (std::size_t b = 0; b < samples.size(); b += 256) {
      const std::size_t e = std::min(samples.size(), b + 256);
      total += stage1_loss(s, make_batch(b, e), nullptr) * static_cast<double>(e - b);
    }
    return total / static_cast<double>(samples.size());
  };

  s.loss_history.push_back(full_loss());
  auto params = s.params();
  AdamState adam = adam_init(params);
  auto rng = make_rng(options.seed, "san.shuffle");
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(samples.begin(), samples.end(), rng);
    for (std::size_t b = 0; b < samples.size(); b += options.batch_size) {
      const std::size_t e = std::min(samples.size(), b + options.batch_size);
      SanState g = s;
      g.mean_net = zero_net(s.mean_net);
      g.var_net = zero_net(s.var_net);
      stage1_loss(s, make_batch(b, e), &g);
      adam_step(params, g.params(), adam, options.learning_rate);
    }
    const double loss = full_loss();
    if (!std::isfinite(loss)) {
      fail(ErrorKind::numeric, "SAN stage 1 loss is not finite at epoch " +
                                   std::to_string(epoch + 1));
    }
    s.loss_history.push_back(loss);
  }
  return s;
}

Matrix san_normalize(const MatrixRef& x, const SanState& state) {
  require(state.frozen, "SAN statistics predictor must be frozen before stage 2");
  require(static_cast<std::size_t>(x.rows()) == state.lookback,
          "input length does not match the SAN state");
  const auto p = static_cast<Eigen::Index>(state.patch);
  const PatchStats s = patch_stats(x, state.patch);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < s.mean.rows(); ++j) {
    const Eigen::RowVectorXd inv_std =
        (s.var.row(j).array() + kSanEpsilon).sqrt().inverse().matrix();
    out.middleRows(j * p, p) =
        ((x.middleRows(j * p, p).rowwise() - s.mean.row(j)).array().rowwise() *
         inv_std.array())
            .matrix();
  }
  return out;
}

Matrix san_output_scale(const PatchStats& predicted, std::size_t patch) {
  const auto p = static_cast<Eigen::Index>(patch);
  Matrix scale(predicted.var.rows() * p, predicted.var.cols());
  for (Eigen::Index j = 0; j < predicted.var.rows(); ++j) {
    const Eigen::RowVectorXd sd = (predicted.var.row(j).array() + kSanEpsilon).sqrt().matrix();
    scale.middleRows(j * p, p) = sd.replicate(p, 1);
  }
  return scale;
}

Matrix san_denormalize(const MatrixRef& yhat, const PatchStats& predicted,
                       const SanState& state) {
  require(state.frozen, "SAN statistics predictor must be frozen before stage 2");
  require(static_cast<std::size_t>(yhat.rows()) == state.horizon &&
              predicted.mean.cols() == yhat.cols(),
          "forecast shape does not match the SAN state");
  const auto p = static_cast<Eigen::Index>(state.patch);
  Matrix out = yhat.cwiseProduct(san_output_scale(predicted, state.patch));
  for (Eigen::Index j = 0; j < predicted.mean.rows(); ++j) {
    out.middleRows(j * p, p).rowwise() += predicted.mean.row(j);
  }
  return out;
}

}  // namespace specshift
