#include "specshift/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "specshift/error.hpp"
#include "specshift/synthetic.hpp"

namespace specshift {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::string format_report(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  fail(ErrorKind::invalid_argument,
       "config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* last = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), last, out);
  if (v.empty() || ec != std::errc() || ptr != last || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* last = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), last, out);
  if (v.empty() || ec != std::errc() || ptr != last) bad_value(key, v, "a non-negative integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

template <class T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& f) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) s += ",";
    s += f(items[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  return join<double>(v, [](const double& d) { return format_double(d); });
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  return join<std::size_t>(v, [](const std::size_t& d) { return std::to_string(d); });
}

std::string join_strings(const std::vector<std::string>& v) {
  return join<std::string>(v, [](const std::string& s) { return s; });
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(to_uint(key, item));
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define SIZE_FIELD(name)                                                              \
  Field {                                                                             \
    #name, [](const RunConfig& c) { return std::to_string(c.name); },                 \
        [](RunConfig& c, const std::string& v) { c.name = to_uint(#name, v); }        \
  }
#define DOUBLE_FIELD(name)                                                            \
  Field {                                                                             \
    #name, [](const RunConfig& c) { return format_double(c.name); },                  \
        [](RunConfig& c, const std::string& v) { c.name = to_double(#name, v); }      \
  }
#define STRING_FIELD(name)                                                            \
  Field {                                                                             \
    #name, [](const RunConfig& c) { return c.name; },                                 \
        [](RunConfig& c, const std::string& v) { c.name = v; }                        \
  }
#define DOUBLES_FIELD(name)                                                           \
  Field {                                                                             \
    #name, [](const RunConfig& c) { return join_doubles(c.name); },                   \
        [](RunConfig& c, const std::string& v) { c.name = to_doubles(#name, v); }     \
  }
#define SIZES_FIELD(name)                                                             \
  Field {                                                                             \
    #name, [](const RunConfig& c) { return join_sizes(c.name); },                     \
        [](RunConfig& c, const std::string& v) { c.name = to_sizes(#name, v); }       \
  }
#define STRINGS_FIELD(name)                                                           \
  Field {                                                                             \
    #name, [](const RunConfig& c) { return join_strings(c.name); },                   \
        [](RunConfig& c, const std::string& v) { c.name = split_list(v); }            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      STRING_FIELD(data),
      SIZE_FIELD(data_seed),
      SIZE_FIELD(lookback),
      SIZE_FIELD(horizon),
      DOUBLES_FIELD(split),
      STRING_FIELD(method),
      STRING_FIELD(backbone),
      SIZE_FIELD(kernel),
      Field{"shared", [](const RunConfig& c) { return std::string(c.shared ? "true" : "false"); },
            [](RunConfig& c, const std::string& v) { c.shared = to_bool("shared", v); }},
      DOUBLE_FIELD(lr),
      SIZE_FIELD(batch_size),
      SIZE_FIELD(max_epochs),
      SIZE_FIELD(patience),
      SIZE_FIELD(seed),
      STRING_FIELD(metric),
      DOUBLE_FIELD(score_epsilon),
      STRING_FIELD(window),
      SIZE_FIELD(resolution),
      SIZE_FIELD(tifo_hidden),
      STRING_FIELD(score_input),
      STRING_FIELD(weight_activation),
      SIZE_FIELD(san_patch),
      SIZE_FIELD(san_epochs),
      SIZE_FIELD(fan_k),
      DOUBLE_FIELD(alpha),
      DOUBLES_FIELD(alphas),
      DOUBLES_FIELD(ema_decays),
      SIZE_FIELD(hist_bins),
      SIZE_FIELD(repeats),
      STRINGS_FIELD(ablate_windows),
      SIZES_FIELD(ablate_resolutions),
      STRINGS_FIELD(ablate_metrics),
      DOUBLES_FIELD(ablate_alphas),
      DOUBLES_FIELD(ablate_emas),
      STRING_FIELD(out),
  };
  return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD
#undef STRING_FIELD
#undef DOUBLES_FIELD
#undef SIZES_FIELD
#undef STRINGS_FIELD

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, trim(value));
      return;
    }
  }
  fail(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::invalid_argument,
           origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::invalid_argument, path.string() + ": cannot read config");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> config_pairs(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::string to_text(const RunConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : config_pairs(cfg)) s += k + "=" + v + "\n";
  return s;
}

void validate(const RunConfig& cfg) {
  require(!cfg.data.empty(), "data must name a CSV file or 'synthetic'");
  require(cfg.lookback >= 2, "lookback must be >= 2");
  require(cfg.horizon >= 1, "horizon must be >= 1");
  require(cfg.split.size() == 3, "split needs three ratios");
  const Method method = parse_method(cfg.method);
  const BackboneKind backbone = parse_backbone(cfg.backbone);
  if (backbone == BackboneKind::dlinear) {
    require(cfg.kernel % 2 == 1 && cfg.kernel <= cfg.lookback,
            "kernel must be odd and <= lookback");
  }
  require(cfg.lr > 0.0, "lr must be > 0");
  require(cfg.batch_size >= 1, "batch_size must be >= 1");
  require(cfg.max_epochs >= 1, "max_epochs must be >= 1");
  require(cfg.patience >= 1, "patience must be >= 1");
  parse_metric(cfg.metric);
  require(cfg.score_epsilon > 0.0, "score_epsilon must be > 0");
  parse_window(cfg.window);
  resolve_keep_bins(cfg.resolution, cfg.lookback);
  require(cfg.tifo_hidden >= 1, "tifo_hidden must be >= 1");
  parse_score_input(cfg.score_input);
  parse_weight_activation(cfg.weight_activation);
  if (uses_san(method)) check_san_patch(cfg.lookback, cfg.horizon, cfg.san_patch);
  if (method == Method::fan) {
    require(cfg.fan_k >= 1 && cfg.fan_k <= bin_count(cfg.lookback) &&
                cfg.fan_k <= bin_count(cfg.horizon),
            "fan_k must be in [1, " +
                std::to_string(std::min(bin_count(cfg.lookback), bin_count(cfg.horizon))) + "]");
  }
  auto check_alpha = [](double a) { require(a >= 0.0 && a <= 1.0, "alpha values must lie in [0, 1]"); };
  check_alpha(cfg.alpha);
  for (double a : cfg.alphas) check_alpha(a);
  for (double a : cfg.ablate_alphas) check_alpha(a);
  auto check_ema = [](double d) { require(d > 0.0 && d <= 1.0, "ema decays must lie in (0, 1]"); };
  for (double d : cfg.ema_decays) check_ema(d);
  for (double d : cfg.ablate_emas) check_ema(d);
  require(cfg.hist_bins >= 2, "hist_bins must be >= 2");
  require(cfg.repeats >= 1, "repeats must be >= 1");
  require(!cfg.ablate_windows.empty() && !cfg.ablate_resolutions.empty() &&
              !cfg.ablate_metrics.empty() && !cfg.ablate_alphas.empty() &&
              !cfg.ablate_emas.empty(),
          "ablation axes must not be empty");
  for (const auto& w : cfg.ablate_windows) parse_window(w);
  for (const auto& m : cfg.ablate_metrics) parse_metric(m);
  for (std::size_t r : cfg.ablate_resolutions) resolve_keep_bins(r, cfg.lookback);
  require(!cfg.out.empty(), "out must name a directory");
}

TrainConfig to_train_config(const RunConfig& cfg) {
  TrainConfig t;
  PipelineConfig& p = t.pipeline;
  p.method = parse_method(cfg.method);
  p.backbone.kind = parse_backbone(cfg.backbone);
  p.backbone.kernel = cfg.kernel;
  p.backbone.shared = cfg.shared;
  p.tifo_hidden = cfg.tifo_hidden;
  p.tifo_init.input = parse_score_input(cfg.score_input);
  p.tifo_init.activation = parse_weight_activation(cfg.weight_activation);
  p.metric = parse_metric(cfg.metric);
  p.score_epsilon = cfg.score_epsilon;
  p.spectral.window = parse_window(cfg.window);
  p.spectral.keep = cfg.resolution == 0 ? 0 : resolve_keep_bins(cfg.resolution, cfg.lookback);
  p.san_patch = cfg.san_patch;
  p.san_epochs = cfg.san_epochs;
  p.fan_k = cfg.fan_k;
  p.seed = cfg.seed;
  t.learning_rate = cfg.lr;
  t.batch_size = cfg.batch_size;
  t.max_epochs = cfg.max_epochs;
  t.patience = cfg.patience;
  t.seed = cfg.seed;
  return t;
}

WindowedDataset load_dataset(const RunConfig& cfg) {
  if (cfg.data == "synthetic") {
    return shift_benchmark_dataset(shift_benchmark_spec(cfg.data_seed, cfg.lookback, cfg.horizon));
  }
  const RawSeries raw = load_csv(cfg.data);
  return zscore_fit_apply(chronological_split(make_windows(raw, cfg.lookback, cfg.horizon),
                                              {cfg.split[0], cfg.split[1], cfg.split[2]}));
}

}  // namespace specshift
