#include "specshift/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "specshift/adam.hpp"
#include "specshift/error.hpp"
#include "specshift/losses.hpp"

namespace specshift {

void validate(const TrainConfig& c) {
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), "learning rate must be > 0");
  require(c.batch_size >= 1, "batch size must be >= 1");
  require(c.max_epochs >= 1, "max epochs must be >= 1");
  require(c.patience >= 1, "patience must be >= 1");
}

namespace {

std::vector<Matrix> snapshot(Pipeline& p) {
  std::vector<Matrix> out;
  for (const auto& t : p.trainable()) out.push_back(*t.value);
  return out;
}

void restore(Pipeline& p, const std::vector<Matrix>& values) {
  auto params = p.trainable();
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].value = values[i];
}

double split_loss(const Pipeline& p, const WindowedDataset& data, Split split) {
  const auto idx = indices_of(data, split);
  if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (std::size_t b = 0; b < idx.size(); b += 256) {
    const std::vector<std::size_t> chunk(idx.begin() + static_cast<std::ptrdiff_t>(b),
                                         idx.begin() + static_cast<std::ptrdiff_t>(
                                                           std::min(idx.size(), b + 256)));
    total += p.loss_and_grad(make_batch(data, chunk), nullptr) * static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(idx.size());
}

Metrics evaluate_any(const Pipeline& pipeline, const WindowedDataset& data, Split split,
                     const EvalOptions& options) {
  require(options.alpha >= 0.0 && options.alpha <= 1.0, "alpha must lie in [0, 1]");
  require(options.batch_size >= 1, "batch size must be >= 1");
  const bool tifo_on = uses_tifo(pipeline.config.method);
  if (tifo_on) require(pipeline.has_scores, "pipeline has no stability scores");
  const auto idx = indices_of(data, split);
  require(!idx.empty(), std::string(to_string(split)) + " split is empty");
  bool refresh = false;
  if (options.ema_decay.has_value()) {
    const double d = *options.ema_decay;
    require(d > 0.0 && d <= 1.0, "ema decay must lie in (0, 1]");
    refresh = tifo_on && d < 1.0;
  }

  StabilityScores scores = pipeline.scores;
  FrequencyWeights w;
  if (tifo_on) w = alpha_scale(weights(pipeline.tifo, scores), options.alpha);

  double se = 0.0, ae = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < idx.size(); b += options.batch_size) {
    const std::vector<std::size_t> chunk(
        idx.begin() + static_cast<std::ptrdiff_t>(b),
        idx.begin() + static_cast<std::ptrdiff_t>(std::min(idx.size(), b + options.batch_size)));
    const Batch batch = make_batch(data, chunk);
    if (refresh && chunk.size() >= 2) {
      const AmplitudePanel panel =
          panel_from_channels(pipeline.score_view(batch), pipeline.config.spectral);
      scores = ema_refresh(scores, panel, *options.ema_decay);
      w = alpha_scale(weights(pipeline.tifo, scores), options.alpha);
    }
    const auto pred = pipeline.predict(batch, tifo_on ? &w : nullptr);
    for (std::size_t c = 0; c < pred.size(); ++c) {
      se += (pred[c] - batch.y[c]).squaredNorm();
      ae += (pred[c] - batch.y[c]).cwiseAbs().sum();
      count += static_cast<std::size_t>(pred[c].size());
    }
  }
  Metrics m;
  m.mse = se / static_cast<double>(count);
  m.mae = ae / static_cast<double>(count);
  m.windows = idx.size();
  if (!std::isfinite(m.mse)) fail(ErrorKind::numeric, "non-finite evaluation error");
  return m;
}

}  // namespace

TrainResult train(const TrainConfig& config, const WindowedDataset& data,
                  const StabilityScores* scores) {
  validate(config);
  require(data.is_split(), "dataset must be split before training");
  const auto train_idx = indices_of(data, Split::train);
  const auto val_idx = indices_of(data, Split::val);
  require(!train_idx.empty(), "train split is empty");
  require(!val_idx.empty(), "validation split is empty");

  TrainResult result;
  PipelineConfig pc = config.pipeline;
  pc.seed = config.seed;
  result.pipeline = make_pipeline(pc, data);
  Pipeline& p = result.pipeline;
  if (uses_tifo(pc.method)) {
    if (scores != nullptr) {
      require(scores->bins() == p.tifo.bins && scores->channels() == p.tifo.channels,
              "supplied scores do not match the dataset's bins and channels");
      p.scores = *scores;
    } else {
      p.scores = fit_scores(p, data);
      result.notes.push_back("stability scores fit on the train split (" +
                             to_string(p.scores.metric) + ")");
    }
    p.has_scores = true;
  }

  auto check_finite = [](double v, const std::string& where) {
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "non-finite loss " + where);
  };

  EpochRecord init;
  init.train_mse = split_loss(p, data, Split::train);
  init.val_mse = evaluate_any(p, data, Split::val, {}).mse;
  init.lr = config.learning_rate;
  check_finite(init.val_mse, "at initialization");
  result.history.push_back(init);

  double best_overall = init.val_mse;
  std::vector<Matrix> best_params = snapshot(p);
  double best_run = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;

  auto params = p.trainable();
  AdamState adam = adam_init(params);
  auto rng = make_rng(config.seed, "train.shuffle");
  std::vector<std::size_t> order = train_idx;
  Pipeline grad = p.zeros_like();
  auto grad_params = grad.trainable();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    const std::uint64_t rejected_before = adam.rejected;
    std::size_t batch_no = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch_no) {
      const std::vector<std::size_t> chunk(
          order.begin() + static_cast<std::ptrdiff_t>(b),
          order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + config.batch_size)));
      zero(grad_params);
      const double loss = p.loss_and_grad(make_batch(data, chunk), &grad);
      check_finite(loss, "at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_no));
      loss_sum += loss * static_cast<double>(chunk.size());
      adam_step(params, grad_params, adam, config.learning_rate);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = loss_sum / static_cast<double>(order.size());
    rec.val_mse = evaluate_any(p, data, Split::val, {}).mse;
    rec.lr = config.learning_rate;
    rec.rejected_steps = static_cast<std::size_t>(adam.rejected - rejected_before);
    check_finite(rec.val_mse, "in validation after epoch " + std::to_string(epoch));
    result.history.push_back(rec);

    if (rec.val_mse < best_overall) {
      best_overall = rec.val_mse;
      best_params = snapshot(p);
      result.best_epoch = epoch;
    }
    if (rec.val_mse < best_run) {
      best_run = rec.val_mse;
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      result.notes.push_back("early stop after epoch " + std::to_string(epoch));
      break;
    }
  }
  restore(p, best_params);
  p.trained = true;
  return result;
}


Metrics evaluate(const Pipeline& pipeline, const WindowedDataset& data, Split split,
                 const EvalOptions& options) {
  require(pipeline.trained, "pipeline has not been trained");
  return evaluate_any(pipeline, data, split, options);
}

double finite_diff_check(Pipeline& pipeline, const Batch& sample, double step) {
  require(step > 0.0, "step must be > 0");
  Pipeline grad = pipeline.zeros_like();
  pipeline.loss_and_grad(sample, &grad);
  auto params = pipeline.trainable();
  auto grads = grad.trainable();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = *params[i].value;
    for (Eigen::Index j = 0; j < value.size(); ++j) {
      const double saved = value.data()[j];
      value.data()[j] = saved + step;
      const double up = pipeline.loss_and_grad(sample, nullptr);
      value.data()[j] = saved - step;
      const double down = pipeline.loss_and_grad(sample, nullptr);
      value.data()[j] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grads[i].value->data()[j];
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-2});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace specshift
