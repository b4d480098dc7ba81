#include "specshift/pipeline.hpp"

#include <cmath>
#include <span>
#include <string>

#include "specshift/error.hpp"
#include "specshift/losses.hpp"

namespace specshift {

Method parse_method(std::string_view name) {
  if (name == "none") return Method::none;
  if (name == "revin") return Method::revin;
  if (name == "san") return Method::san;
  if (name == "fan") return Method::fan;
  if (name == "tifo") return Method::tifo;
  if (name == "tifo+san" || name == "tifo_san") return Method::tifo_san;
  fail(ErrorKind::invalid_argument,
       "unknown method '" + std::string(name) +
           "' (expected none, revin, san, fan, tifo or tifo+san)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::none:
      return "none";
    case Method::revin:
      return "revin";
    case Method::san:
      return "san";
    case Method::fan:
      return "fan";
    case Method::tifo:
      return "tifo";
    case Method::tifo_san:
      return "tifo+san";
  }
  return "none";
}

bool uses_tifo(Method m) noexcept { return m == Method::tifo || m == Method::tifo_san; }
bool uses_san(Method m) noexcept { return m == Method::san || m == Method::tifo_san; }

Batch make_batch(const WindowedDataset& data, const std::vector<std::size_t>& indices) {
  Batch b;
  b.x.resize(data.channels());
  b.y.resize(data.channels());
  for (std::size_t c = 0; c < data.channels(); ++c) {
    gather_channel(data, indices, c, b.x[c], b.y[c]);
  }
  return b;
}

namespace {

std::span<const double> col(const Matrix& m, Eigen::Index j) {
  return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

std::span<double> col(Matrix& m, Eigen::Index j) {
  return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

struct ChannelTrace {
  PatchStats san_pred;
  ColumnStats revin_stats;
  Matrix re, im;     // masked spectra of the operator input (K x B)
  Matrix x_op;       // backbone input (or FAN input)
  FanSplit split;
  FanCache fan_cache;
  Matrix main;       // FAN main-frequency forecast
  Matrix z;          // backbone output
  Matrix combined;   // before any denormalizer
  Matrix revin_out;  // after RevIN denormalize
};

bool uses_revin(Method m) { return m == Method::revin; }

}  // namespace

std::vector<ParamRef> Pipeline::trainable() {
  auto out = backbone.params();
  auto append = [&out](std::vector<ParamRef> more) {
    out.insert(out.end(), more.begin(), more.end());
  };
  if (uses_revin(config.method)) append(revin.params());
  if (config.method == Method::fan) append(fan.params());
  if (uses_tifo(config.method)) append(tifo.params());
  return out;
}

std::vector<ParamRef> Pipeline::tensors() {
  auto out = trainable();
  if (uses_san(config.method)) {
    auto s = san.params();
    out.insert(out.end(), s.begin(), s.end());
  }
  if (has_scores) {
    out.push_back({"scores",
                   {static_cast<std::size_t>(scores.values.rows()),
                    static_cast<std::size_t>(scores.values.cols())},
                   &scores.values});
  }
  return out;
}

Pipeline Pipeline::zeros_like() const {
  Pipeline g = *this;
  zero(g.trainable());
  return g;
}

FrequencyWeights Pipeline::current_weights() const {
  require(uses_tifo(config.method), "method " + to_string(config.method) +
                                        " has no frequency operator");
  require(has_scores, "stability scores are required for method " +
                          to_string(config.method));
  return weights(tifo, scores);
}

std::vector<Matrix> Pipeline::score_view(const Batch& batch) const {
  if (!uses_san(config.method)) return batch.x;
  std::vector<Matrix> out;
  out.reserve(batch.x.size());
  for (const auto& x : batch.x) out.push_back(san_normalize(x, san));
  return out;
}

namespace {

// Forward pass for one channel. `w` may be null when the method has no
// frequency operator.
Matrix run_channel(const Pipeline& p, std::size_t c, const Matrix& x,
                   const FrequencyWeights* w, ChannelTrace& t, bool stop_at_input = false) {
  const Method m = p.config.method;
  Matrix cur;
  if (uses_san(m)) {
    t.san_pred = san_predict(p.san, patch_stats(x, p.san.patch));
    cur = san_normalize(x, p.san);
  } else {
    cur = x;
  }
  if (uses_revin(m)) cur = revin_normalize(cur, t.revin_stats);
  if (uses_tifo(m)) {
    const SpectralReweighter rw(static_cast<std::size_t>(x.rows()), p.config.spectral);
    const auto k = static_cast<Eigen::Index>(rw.bins());
    const auto ci = static_cast<Eigen::Index>(c);
    t.re.resize(k, cur.cols());
    t.im.resize(k, cur.cols());
    t.x_op.resize(cur.rows(), cur.cols());
    for (Eigen::Index j = 0; j < cur.cols(); ++j) {
      rw.apply(col(cur, j), col(w->real, ci), col(w->imag, ci), col(t.x_op, j), col(t.re, j),
               col(t.im, j));
    }
  } else {
    t.x_op = std::move(cur);
  }
  if (m == Method::fan) {
    t.split = fan_main_freq_part(t.x_op, p.fan.k);
    if (stop_at_input) return t.split.residual;
    t.main = fan_mlp_forward(p.fan, t.split.filtered, t.x_op, t.fan_cache);
    t.z = backbone_forward_channel(p.backbone, c, t.split.residual);
    const auto ci = static_cast<Eigen::Index>(c);
    t.combined = p.fan.combine(0, ci) * t.z + p.fan.combine(1, ci) * t.main;
  } else {
    if (stop_at_input) return t.x_op;
    t.z = backbone_forward_channel(p.backbone, c, t.x_op);
    t.combined = t.z;
  }
  Matrix y = t.combined;
  if (uses_revin(m)) {
    const auto ci = static_cast<Eigen::Index>(c);
    const Vector gamma = Vector::Constant(y.cols(), p.revin.gamma(ci, 0));
    const Vector beta = Vector::Constant(y.cols(), p.revin.beta(ci, 0));
    y = revin_denormalize(y, t.revin_stats, gamma, beta);
    t.revin_out = y;
  }
  if (uses_san(m)) y = san_denormalize(y, t.san_pred, p.san);
  return y;
}

void check_batch(const Pipeline& p, const Batch& batch, bool need_targets) {
  const auto& bc = p.config.backbone;
  require(batch.x.size() == bc.channels, "batch has " + std::to_string(batch.x.size()) +
                                             " channels, pipeline expects " +
                                             std::to_string(bc.channels));
  require(batch.size() >= 1, "empty batch");
  for (std::size_t c = 0; c < batch.x.size(); ++c) {
    require(static_cast<std::size_t>(batch.x[c].rows()) == bc.lookback,
            "batch input length does not match the pipeline lookback");
    if (need_targets) {
      require(batch.y.size() == batch.x.size() &&
                  static_cast<std::size_t>(batch.y[c].rows()) == bc.horizon &&
                  batch.y[c].cols() == batch.x[c].cols(),
              "batch targets do not match the pipeline horizon");
    }
  }
}

}  // namespace

std::vector<Matrix> Pipeline::predict(const Batch& batch, const FrequencyWeights* w) const {
  check_batch(*this, batch, false);
  FrequencyWeights own;
  if (uses_tifo(config.method) && w == nullptr) {
    own = current_weights();
    w = &own;
  }
  std::vector<Matrix> out;
  out.reserve(batch.x.size());
  ChannelTrace t;
  for (std::size_t c = 0; c < batch.x.size(); ++c) {
    out.push_back(run_channel(*this, c, batch.x[c], w, t));
  }
  return out;
}

std::vector<Matrix> Pipeline::predict(const Batch& batch) const { return predict(batch, nullptr); }

std::vector<Matrix> Pipeline::input_transform(const Batch& batch,
                                              const FrequencyWeights* w) const {
  check_batch(*this, batch, false);
  FrequencyWeights own;
  if (uses_tifo(config.method) && w == nullptr) {
    own = current_weights();
    w = &own;
  }
  std::vector<Matrix> out;
  ChannelTrace t;
  for (std::size_t c = 0; c < batch.x.size(); ++c) {
    out.push_back(run_channel(*this, c, batch.x[c], w, t, true));
  }
  return out;
}

AmplitudePanel Pipeline::operator_panel(const Batch& batch, const FrequencyWeights* w) const {
  check_batch(*this, batch, false);
  FrequencyWeights own;
  if (w == nullptr) {
    own = current_weights();
    w = &own;
  }
  const auto view = score_view(batch);
  const SpectralReweighter rw(config.backbone.lookback, config.spectral);
  const std::size_t bins = rw.bins();
  AmplitudePanel panel(batch.size(), bins, view.size());
  std::vector<double> y(config.backbone.lookback), re(bins), im(bins);
  for (std::size_t c = 0; c < view.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      rw.apply(col(view[c], static_cast<Eigen::Index>(i)), col(w->real, ci), col(w->imag, ci), y,
               re, im);
      for (std::size_t k = 0; k < bins; ++k) {
        panel.at(i, k, c) = std::hypot(w->real(static_cast<Eigen::Index>(k), ci) * re[k],
                                       w->imag(static_cast<Eigen::Index>(k), ci) * im[k]);
      }
    }
  }
  return panel;
}

double Pipeline::loss_and_grad(const Batch& batch, Pipeline* grad) const {
  check_batch(*this, batch, true);
  const Method m = config.method;
  const bool tifo_on = uses_tifo(m);
  FrequencyWeights w;
  if (tifo_on) w = current_weights();
  FrequencyWeights g_lambda;
  if (tifo_on && grad != nullptr) {
    g_lambda.real = Matrix::Zero(w.real.rows(), w.real.cols());
    g_lambda.imag = Matrix::Zero(w.imag.rows(), w.imag.cols());
  }
  const double count = static_cast<double>(batch.size() * config.backbone.horizon *
                                           config.backbone.channels);
  double loss = 0.0;
  ChannelTrace t;
  for (std::size_t c = 0; c < batch.x.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const Matrix yhat = run_channel(*this, c, batch.x[c], tifo_on ? &w : nullptr, t);
    Matrix g_z;
    if (m == Method::fan) {
      const FanSplit ys = fan_main_freq_part(batch.y[c], fan.k);
      const Matrix res_pred = fan.combine(0, ci) * t.z;
      const Matrix main_pred = fan.combine(1, ci) * t.main;
      loss += ((res_pred - ys.residual).squaredNorm() +
               (main_pred - ys.filtered).squaredNorm()) /
              count;
      if (grad == nullptr) continue;
      const Matrix g_res = mse_grad(res_pred, ys.residual, count);
      const Matrix g_main = mse_grad(main_pred, ys.filtered, count);
      grad->fan.combine(0, ci) += g_res.cwiseProduct(t.z).sum();
      grad->fan.combine(1, ci) += g_main.cwiseProduct(t.main).sum();
      fan_mlp_vjp(fan, t.split.filtered, t.x_op, t.fan_cache, fan.combine(1, ci) * g_main,
                  grad->fan);
      backbone_vjp_channel(backbone, c, t.split.residual, fan.combine(0, ci) * g_res,
                           grad->backbone, nullptr);
      continue;
    }
    loss += (yhat - batch.y[c]).squaredNorm() / count;
    if (grad == nullptr) continue;
    Matrix g = mse_grad(yhat, batch.y[c], count);
    if (uses_san(m)) g = g.cwiseProduct(san_output_scale(t.san_pred, san.patch));
    if (uses_revin(m)) {
      const double gamma = revin.gamma(ci, 0);
      Matrix pre = t.combined;
      for (Eigen::Index j = 0; j < pre.cols(); ++j) {
        pre.col(j) = (pre.col(j).array() * t.revin_stats.std(j) + t.revin_stats.mean(j)).matrix();
      }
      grad->revin.gamma(ci, 0) += g.cwiseProduct(pre).sum();
      grad->revin.beta(ci, 0) += g.sum();
      g = gamma * (g.array().rowwise() * t.revin_stats.std.transpose().array()).matrix();
    }
    g_z = std::move(g);
    Matrix g_x;
    backbone_vjp_channel(backbone, c, t.x_op, g_z, grad->backbone, tifo_on ? &g_x : nullptr);
    if (tifo_on) {
      const SpectralReweighter rw(config.backbone.lookback, config.spectral);
      for (Eigen::Index j = 0; j < g_x.cols(); ++j) {
        rw.vjp(col(g_x, j), col(t.re, j), col(t.im, j), col(w.real, ci), col(w.imag, ci),
               col(g_lambda.real, ci), col(g_lambda.imag, ci));
      }
    }
  }
  if (tifo_on && grad != nullptr) weights_vjp(tifo, scores, g_lambda, grad->tifo);
  return loss;
}

AmplitudePanel panel_from_channels(const std::vector<Matrix>& channels,
                                   const SpectralOptions& options) {
  require(!channels.empty() && channels[0].cols() >= 1, "empty panel input");
  const auto length = static_cast<std::size_t>(channels[0].rows());
  const auto samples = static_cast<std::size_t>(channels[0].cols());
  const RealDft dft(length);
  const std::size_t bins = dft.bins();
  const std::size_t keep = options.keep == 0 ? bins : options.keep;
  require(keep >= 1 && keep <= bins, "keep out of range for panel");
  const auto taps = window_taps(options.window, length);
  AmplitudePanel panel(samples, bins, channels.size());
  std::vector<double> x(length), re(bins), im(bins);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    for (std::size_t i = 0; i < samples; ++i) {
      const auto src = col(channels[c], static_cast<Eigen::Index>(i));
      for (std::size_t n = 0; n < length; ++n) x[n] = src[n] * taps[n];
      dft.forward(x, re, im);
      for (std::size_t k = 0; k < keep; ++k) panel.at(i, k, c) = std::hypot(re[k], im[k]);
    }
  }
  return panel;
}

AmplitudePanel score_panel(const Pipeline& pipeline, const WindowedDataset& data,
                           const std::vector<std::size_t>& indices) {
  const Batch b = make_batch(data, indices);
  return panel_from_channels(pipeline.score_view(b), pipeline.config.spectral);
}

StabilityScores fit_scores(const Pipeline& pipeline, const WindowedDataset& data) {
  const auto train = indices_of(data, Split::train);
  const AmplitudePanel panel = score_panel(pipeline, data, train);
  switch (pipeline.config.metric) {
    case ScoreMetric::mu_sigma:
      return stability_scores(panel, pipeline.config.score_epsilon);
    case ScoreMetric::entropy:
      return entropy_scores(panel);
    case ScoreMetric::correlation: {
      require(data.horizon() >= 1, "the correlation metric needs target windows");
      Matrix means(static_cast<Eigen::Index>(train.size()),
                   static_cast<Eigen::Index>(data.channels()));
      for (std::size_t i = 0; i < train.size(); ++i) {
        means.row(static_cast<Eigen::Index>(i)) = data.target(train[i]).colwise().mean();
      }
      return correlation_scores(panel, means);
    }
  }
  return {};
}

Pipeline make_pipeline_shell(const PipelineConfig& config, std::size_t lookback,
                             std::size_t horizon, std::size_t channels) {
  BackboneConfig bc = config.backbone;
  bc.lookback = lookback;
  bc.horizon = horizon;
  bc.channels = channels;
  require(lookback >= 2, "lookback must be >= 2");
  require(horizon >= 1, "horizon must be >= 1");
  require(channels >= 1, "channels must be >= 1");
  Pipeline p;
  p.config = config;
  p.config.backbone = bc;
  p.backbone = init_backbone(bc, config.seed);
  const Method m = config.method;
  if (uses_revin(m)) p.revin = init_revin(bc.channels);
  if (m == Method::fan) {
    require(config.fan_k <= bin_count(bc.horizon),
            "fan_k must not exceed the horizon's bin count " +
                std::to_string(bin_count(bc.horizon)));
    p.fan = init_fan(bc.lookback, bc.horizon, bc.channels, config.fan_k, config.seed);
  }
  if (uses_san(m)) p.san = san_init(bc.lookback, bc.horizon, config.san_patch, config.seed);
  if (uses_tifo(m)) {
    const std::size_t bins = bin_count(bc.lookback);
    require(config.spectral.keep <= bins, "keep exceeds the bin count " + std::to_string(bins));
    p.tifo = init_tifo(bins, bc.channels, config.tifo_hidden, config.seed, config.tifo_init);
  }
  return p;
}

Pipeline make_pipeline(const PipelineConfig& config, const WindowedDataset& data) {
  Pipeline p = make_pipeline_shell(config, data.lookback(), data.horizon(), data.channels());
  if (uses_san(config.method)) {
    SanTrainOptions opts;
    opts.seed = config.seed;
    p.san = san_stage1_train(data, config.san_patch, config.san_epochs, opts);
    p.san.frozen = true;
  }
  return p;
}

}  // namespace specshift
