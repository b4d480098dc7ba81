#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "specshift/shift_metrics.hpp"
#include "specshift/stationarity.hpp"
#include "specshift/synthetic.hpp"
#include "specshift/trainer.hpp"

namespace specshift::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return 2;
    case ErrorKind::data:
      return 3;
    case ErrorKind::numeric:
      return 4;
    case ErrorKind::checkpoint:
      return 5;
  }
  return 1;
}

namespace {

// Reports carry six significant digits; round-tripping through the text
// keeps JSON output identical to the CSV text.
double r6(double v) { return std::stod(format_report(v)); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorKind::data, path.string() + ": cannot write");
}

void prepare(const RunConfig& cfg) {
  validate(cfg);
  fs::create_directories(cfg.out);
  write_text(fs::path(cfg.out) / "config.txt", to_text(cfg));
}

std::string meta_or(const Checkpoint& ckpt, const std::string& key) {
  const std::string* v = ckpt.meta_value(key);
  if (v == nullptr) fail(ErrorKind::checkpoint, "checkpoint lacks meta entry '" + key + "'");
  return *v;
}

double meta_double(const Checkpoint& ckpt, const std::string& key) {
  const std::string v = meta_or(ckpt, key);
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    fail(ErrorKind::checkpoint, "checkpoint meta '" + key + "' is not a number: " + v);
  }
}

Checkpoint scores_checkpoint(const StabilityScores& s) {
  Checkpoint ckpt;
  ckpt.meta = {{"score_metric", to_string(s.metric)},
               {"score_epsilon", format_double(s.epsilon)},
               {"score_samples", std::to_string(s.sample_count)}};
  StabilityScores copy = s;
  ckpt.tensors = capture({{"scores", {s.bins(), s.channels()}, &copy.values}});
  return ckpt;
}

StabilityScores scores_from(const Checkpoint& ckpt) {
  const TensorRecord* t = ckpt.find("scores");
  if (t == nullptr) fail(ErrorKind::checkpoint, "checkpoint has no 'scores' tensor");
  if (t->shape.size() != 2) fail(ErrorKind::checkpoint, "tensor 'scores' must be 2-D");
  StabilityScores s;
  s.values.resize(static_cast<Eigen::Index>(t->shape[0]), static_cast<Eigen::Index>(t->shape[1]));
  restore(ckpt, {{"scores", t->shape, &s.values}});
  s.metric = parse_metric(meta_or(ckpt, "score_metric"));
  s.epsilon = meta_double(ckpt, "score_epsilon");
  s.sample_count = static_cast<std::size_t>(meta_double(ckpt, "score_samples"));
  return s;
}

struct ScoreSource {
  StabilityScores scores;
  bool loaded = false;
};

ScoreSource scores_for_training(const RunConfig& cfg, const Pipeline& shell,
                                const WindowedDataset& data) {
  const fs::path path = fs::path(cfg.out) / "scores.bin";
  if (fs::exists(path)) {
    StabilityScores s = scores_from(load_checkpoint(path));
    if (s.metric == shell.config.metric && s.bins() == bin_count(data.lookback()) &&
        s.channels() == data.channels()) {
      return {std::move(s), true};
    }
  }
  return {fit_scores(shell, data), false};
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string s = "epoch,train_mse,val_mse,lr\n";
  for (const auto& r : history) {
    s += std::to_string(r.epoch) + "," + format_report(r.train_mse) + "," +
         format_report(r.val_mse) + "," + format_report(r.lr) + "\n";
  }
  return s;
}

std::vector<double> sweep_alphas(const RunConfig& cfg) {
  return cfg.alphas.empty() ? std::vector<double>{cfg.alpha} : cfg.alphas;
}

std::optional<double> as_decay(double d) {
  return d >= 1.0 ? std::nullopt : std::optional<double>(d);
}

}  // namespace

Checkpoint make_checkpoint(const RunConfig& cfg, Pipeline& pipeline, std::size_t best_epoch) {
  Checkpoint ckpt;
  ckpt.config = config_pairs(cfg);
  const BackboneConfig& bc = pipeline.config.backbone;
  ckpt.meta = {{"method", to_string(pipeline.config.method)},
               {"backbone", to_string(bc.kind)},
               {"lookback", std::to_string(bc.lookback)},
               {"horizon", std::to_string(bc.horizon)},
               {"channels", std::to_string(bc.channels)},
               {"best_epoch", std::to_string(best_epoch)}};
  if (pipeline.has_scores) {
    ckpt.meta.emplace_back("score_metric", to_string(pipeline.scores.metric));
    ckpt.meta.emplace_back("score_epsilon", format_double(pipeline.scores.epsilon));
    ckpt.meta.emplace_back("score_samples", std::to_string(pipeline.scores.sample_count));
  }
  ckpt.tensors = capture(pipeline.tensors());
  return ckpt;
}

Pipeline pipeline_from_checkpoint(const Checkpoint& ckpt, const RunConfig& cfg,
                                  const WindowedDataset& data) {
  const TrainConfig tc = to_train_config(cfg);
  const std::string method = meta_or(ckpt, "method");
  if (method != to_string(tc.pipeline.method)) {
    fail(ErrorKind::checkpoint, "checkpoint was trained with method " + method +
                                    " but the config asks for " + to_string(tc.pipeline.method));
  }
  const std::string backbone = meta_or(ckpt, "backbone");
  if (backbone != to_string(tc.pipeline.backbone.kind)) {
    fail(ErrorKind::checkpoint, "checkpoint was trained with backbone " + backbone +
                                    " but the config asks for " +
                                    to_string(tc.pipeline.backbone.kind));
  }
  PipelineConfig pc = tc.pipeline;
  pc.seed = tc.seed;
  Pipeline p = make_pipeline_shell(pc, data.lookback(), data.horizon(), data.channels());
  if (uses_tifo(pc.method)) {
    p.scores = scores_from(ckpt);
    p.has_scores = true;
  }
  restore(ckpt, p.tensors());
  if (uses_san(pc.method)) p.san.frozen = true;
  p.trained = true;
  return p;
}

void cmd_stats(const RunConfig& cfg, std::ostream& log) {
  prepare(cfg);
  const WindowedDataset data = load_dataset(cfg);
  const TrainConfig tc = to_train_config(cfg);
  PipelineConfig pc = tc.pipeline;
  pc.seed = tc.seed;
  const Pipeline shell = make_pipeline(pc, data);
  const auto train = indices_of(data, Split::train);
  const AmplitudePanel panel = score_panel(shell, data, train);
  const StabilityScores scores = fit_scores(shell, data);

  std::string csv = "channel,freq,mean,std,score\n";
  const auto n = static_cast<double>(panel.samples());
  for (std::size_t c = 0; c < panel.channels(); ++c) {
    for (std::size_t k = 0; k < panel.bins(); ++k) {
      const auto a = panel.column(k, c);
      double mean = 0.0;
      for (double v : a) mean += v;
      mean /= n;
      double var = 0.0;
      for (double v : a) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / n);
      csv += std::to_string(c) + "," + std::to_string(k) + "," + format_report(mean) + "," +
             format_report(sd) + "," +
             format_report(scores.values(static_cast<Eigen::Index>(k),
                                         static_cast<Eigen::Index>(c))) +
             "\n";
    }
  }
  const fs::path out(cfg.out);
  write_text(out / "stats.csv", csv);
  save_checkpoint(out / "scores.bin", scores_checkpoint(scores));
  log << "stats: " << to_string(scores.metric) << " scores over " << scores.sample_count
      << " train windows, " << scores.bins() << " bins x " << scores.channels()
      << " channels -> " << (out / "scores.bin").string() << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  prepare(cfg);
  const WindowedDataset data = load_dataset(cfg);
  const TrainConfig tc = to_train_config(cfg);
  std::optional<ScoreSource> source;
  if (uses_tifo(tc.pipeline.method)) {
    PipelineConfig pc = tc.pipeline;
    pc.seed = tc.seed;
    source = scores_for_training(cfg, make_pipeline(pc, data), data);
    log << (source->loaded ? "train: using stability scores from scores.bin\n"
                           : "train: no matching scores.bin, stability scores auto-fit on the "
                             "train split\n");
  }
  TrainResult result = train(tc, data, source ? &source->scores : nullptr);
  const fs::path out(cfg.out);
  save_checkpoint(out / "checkpoint.bin", make_checkpoint(cfg, result.pipeline, result.best_epoch));
  write_text(out / "history.csv", history_csv(result.history));
  for (const auto& note : result.notes) log << "train: " << note << "\n";
  const EpochRecord& best = result.history[result.best_epoch];
  log << "train: " << cfg.method << "+" << cfg.backbone << ", " << result.history.size() - 1
      << " epochs, best epoch " << result.best_epoch << " val_mse "
      << format_report(best.val_mse) << "\n";
}

void cmd_eval(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& log) {
  prepare(cfg);
  const WindowedDataset data = load_dataset(cfg);
  const Pipeline p = pipeline_from_checkpoint(load_checkpoint(checkpoint), cfg, data);
  const std::vector<double> decays =
      cfg.ema_decays.empty() ? std::vector<double>{1.0} : cfg.ema_decays;
  json records = json::array();
  for (double alpha : sweep_alphas(cfg)) {
    for (double decay : decays) {
      EvalOptions opts;
      opts.alpha = alpha;
      opts.ema_decay = as_decay(decay);
      const Metrics m = evaluate(p, data, Split::test, opts);
      json rec = {{"split", "test"},
                  {"method", cfg.method},
                  {"backbone", cfg.backbone},
                  {"alpha", r6(alpha)},
                  {"ema_decay", opts.ema_decay ? json(r6(decay)) : json(nullptr)},
                  {"mse", r6(m.mse)},
                  {"mae", r6(m.mae)},
                  {"windows", m.windows}};
      log << "eval: alpha " << format_report(alpha) << " ema "
          << (opts.ema_decay ? format_report(decay) : std::string("off")) << " mse "
          << format_report(m.mse) << " mae " << format_report(m.mae) << "\n";
      records.push_back(std::move(rec));
    }
  }
  write_text(fs::path(cfg.out) / "metrics.json", records.dump(2) + "\n");
}

namespace {

double radius60(const ShiftReport& r) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(r.jsd2.size()));
  for (Eigen::Index i = 0; i < r.jsd2.size(); ++i) {
    d.push_back(std::hypot(r.jsd2.data()[i], r.ks.data()[i]));
  }
  return percentile(std::move(d), 60.0);
}

json summary_of(const ShiftReport& r) {
  return {{"mean_jsd2", r6(r.mean_jsd2)}, {"mean_ks", r6(r.mean_ks)}, {"radius60", r6(radius60(r))}};
}

double reduction(double before, double after) {
  return before > 0.0 ? (before - after) / before : 0.0;
}

}  // namespace

void cmd_shift(const RunConfig& cfg, const std::optional<fs::path>& checkpoint,
               std::ostream& log) {
  prepare(cfg);
  const WindowedDataset data = load_dataset(cfg);
  const TrainConfig tc = to_train_config(cfg);
  const Batch train = make_batch(data, indices_of(data, Split::train));
  const Batch test = make_batch(data, indices_of(data, Split::test));
  const SpectralOptions& spectral = tc.pipeline.spectral;
  const ShiftReport before = shift_report(panel_from_channels(train.x, spectral),
                                          panel_from_channels(test.x, spectral), cfg.hist_bins);

  std::optional<ShiftReport> after;
  std::string note;
  if (!checkpoint) {
    note = "no checkpoint given; After omitted";
  } else {
    const Pipeline p = pipeline_from_checkpoint(load_checkpoint(*checkpoint), cfg, data);
    const Method m = p.config.method;
    if (uses_tifo(m)) {
      after = shift_report(p.operator_panel(train), p.operator_panel(test), cfg.hist_bins);
    } else if (m == Method::none) {
      note = "method none has no input transform; After omitted";
    } else {
      after = shift_report(panel_from_channels(p.input_transform(train), spectral),
                           panel_from_channels(p.input_transform(test), spectral),
                           cfg.hist_bins);
    }
  }

  std::string csv = "channel,freq_index,jsd2_before,jsd2_after,ks_before,ks_after\n";
  for (Eigen::Index c = 0; c < before.jsd2.cols(); ++c) {
    for (Eigen::Index k = 0; k < before.jsd2.rows(); ++k) {
      csv += std::to_string(c) + "," + std::to_string(k) + "," +
             format_report(before.jsd2(k, c)) + "," +
             (after ? format_report(after->jsd2(k, c)) : "") + "," +
             format_report(before.ks(k, c)) + "," +
             (after ? format_report(after->ks(k, c)) : "") + "\n";
    }
  }
  json summary = {{"hist_bins", before.histogram_bins},
                  {"train_samples", before.train_samples},
                  {"test_samples", before.test_samples},
                  {"before", summary_of(before)},
                  {"after", after ? summary_of(*after) : json(nullptr)}};
  if (after) {
    summary["reduction"] = {{"jsd2", r6(reduction(before.mean_jsd2, after->mean_jsd2))},
                            {"ks", r6(reduction(before.mean_ks, after->mean_ks))}};
  }
  if (!note.empty()) summary["note"] = note;
  const fs::path out(cfg.out);
  write_text(out / "shift.csv", csv);
  write_text(out / "shift_summary.json", summary.dump(2) + "\n");
  log << "shift: before jsd2 " << format_report(before.mean_jsd2) << " ks "
      << format_report(before.mean_ks);
  if (after) {
    log << ", after jsd2 " << format_report(after->mean_jsd2) << " ks "
        << format_report(after->mean_ks);
  }
  log << (note.empty() ? "" : " (" + note + ")") << "\n";
}

namespace {

struct TrainCell {
  std::string window;
  std::size_t resolution = 0;
  std::string metric;
  std::size_t repeat = 0;
};

struct CellRuns {
  // [alpha][ema] metrics for one trained model.
  std::vector<std::vector<Metrics>> metrics;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

void cmd_ablate(const RunConfig& cfg, std::size_t threads, std::ostream& log) {
  prepare(cfg);
  const WindowedDataset data = load_dataset(cfg);

  std::vector<TrainCell> cells;
  for (const auto& w : cfg.ablate_windows) {
    for (std::size_t r : cfg.ablate_resolutions) {
      for (const auto& m : cfg.ablate_metrics) {
        for (std::size_t rep = 0; rep < cfg.repeats; ++rep) cells.push_back({w, r, m, rep});
      }
    }
  }
  std::vector<CellRuns> runs(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const TrainCell& cell = cells[i];
        RunConfig c = cfg;
        c.window = cell.window;
        c.resolution = cell.resolution;
        c.metric = cell.metric;
        c.seed = cfg.seed + cell.repeat;
        const TrainResult result = train(to_train_config(c), data);
        CellRuns& run = runs[i];
        for (double alpha : cfg.ablate_alphas) {
          std::vector<Metrics> row;
          for (double decay : cfg.ablate_emas) {
            EvalOptions opts;
            opts.alpha = alpha;
            opts.ema_decay = as_decay(decay);
            row.push_back(evaluate(result.pipeline, data, Split::test, opts));
          }
          run.metrics.push_back(std::move(row));
        }
        const std::lock_guard lock(log_mutex);
        log << "ablate: window " << cell.window << " resolution " << cell.resolution
            << " metric " << cell.metric << " seed " << c.seed << " done\n";
      } catch (...) {
        const std::lock_guard lock(log_mutex);
        if (!error) error = std::current_exception();
        next = cells.size();
        return;
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::string csv =
      "window,resolution,keep_bins,metric,alpha,ema_decay,repeats,mse_mean,mse_std,mae_mean,"
      "mae_std\n";
  for (std::size_t base = 0; base < cells.size(); base += cfg.repeats) {
    const TrainCell& cell = cells[base];
    const std::size_t keep = resolve_keep_bins(cell.resolution, cfg.lookback);
    for (std::size_t a = 0; a < cfg.ablate_alphas.size(); ++a) {
      for (std::size_t e = 0; e < cfg.ablate_emas.size(); ++e) {
        std::vector<double> mse, mae;
        for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
          mse.push_back(runs[base + rep].metrics[a][e].mse);
          mae.push_back(runs[base + rep].metrics[a][e].mae);
        }
        const auto [mse_mean, mse_std] = mean_std(mse);
        const auto [mae_mean, mae_std] = mean_std(mae);
        const double decay = cfg.ablate_emas[e];
        csv += cell.window + "," + std::to_string(cell.resolution) + "," + std::to_string(keep) +
               "," + cell.metric + "," + format_report(cfg.ablate_alphas[a]) + "," +
               (decay >= 1.0 ? std::string("off") : format_report(decay)) + "," +
               std::to_string(cfg.repeats) + "," + format_report(mse_mean) + "," +
               format_report(mse_std) + "," + format_report(mae_mean) + "," +
               format_report(mae_std) + "\n";
      }
    }
  }
  write_text(fs::path(cfg.out) / "ablation.csv", csv);
  log << "ablate: " << cells.size() << " training runs on " << n_threads << " thread(s)\n";
}

void cmd_synth(const RunConfig& cfg, std::ostream& log) {
  prepare(cfg);
  const SyntheticSpec spec = shift_benchmark_spec(cfg.data_seed, cfg.lookback, cfg.horizon);
  const RawSeries raw = synthetic_to_raw(spec, generate_synthetic(spec));
  const fs::path path = fs::path(cfg.out) / "synthetic.csv";
  write_csv(path, raw);
  log << "synth: " << raw.rows() << " rows x " << raw.channels() << " channels -> "
      << path.string() << "\n";
}

}  // namespace specshift::cli
