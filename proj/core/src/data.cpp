#include "specshift/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "specshift/error.hpp"

namespace specshift {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

RawSeries parse_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) fail(ErrorKind::data, origin + ": missing header row");

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() != header.size()) {
      fail(ErrorKind::data, origin + ": row " + std::to_string(rows.size()) + " (line " +
                                std::to_string(line_no) + ") has " +
                                std::to_string(fields.size()) + " fields, header has " +
                                std::to_string(header.size()));
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) fail(ErrorKind::data, origin + ": no data rows");

  // The first column is a timestamp when any of its entries is non-numeric.
  bool has_timestamp = false;
  double scratch = 0.0;
  for (const auto& r : rows) {
    if (!parse_number(r[0], scratch) && r[0] != "NaN" && r[0] != "nan") {
      has_timestamp = true;
      break;
    }
  }
  const std::size_t first_channel = has_timestamp ? 1 : 0;
  if (header.size() <= first_channel) {
    fail(ErrorKind::data, origin + ": no numeric columns");
  }

  RawSeries out;
  if (has_timestamp) out.timestamp_name = header[0];
  out.channel_names.assign(header.begin() + static_cast<std::ptrdiff_t>(first_channel),
                           header.end());
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(header.size() - first_channel));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (has_timestamp) out.timestamps.push_back(rows[i][0]);
    for (std::size_t j = first_channel; j < header.size(); ++j) {
      double v = 0.0;
      if (!parse_number(rows[i][j], v) || !std::isfinite(v)) {
        fail(ErrorKind::data, origin + ": row " + std::to_string(i) + ", column '" +
                                  header[j] + "': value '" + rows[i][j] +
                                  "' is not a finite number");
      }
      out.values(static_cast<Eigen::Index>(i),
                 static_cast<Eigen::Index>(j - first_channel)) = v;
    }
  }
  return out;
}

RawSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

void write_csv(const std::filesystem::path& path, const RawSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::data, path.string() + ": cannot open for writing");
  const bool stamps = !series.timestamps.empty();
  if (stamps) out << (series.timestamp_name.empty() ? "date" : series.timestamp_name);
  for (std::size_t c = 0; c < series.channel_names.size(); ++c) {
    if (stamps || c > 0) out << ',';
    out << series.channel_names[c];
  }
  out << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
    if (stamps) out << series.timestamps[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
      if (stamps || c > 0) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), series.values(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

const char* to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "train";
}

Eigen::Block<const Matrix> WindowedDataset::input(std::size_t i) const {
  const WindowRef w = windows_.at(i);
  const Matrix& seg = segments_[w.segment];
  return seg.block(static_cast<Eigen::Index>(w.start), 0,
                   static_cast<Eigen::Index>(lookback_), seg.cols());
}

Eigen::Block<const Matrix> WindowedDataset::target(std::size_t i) const {
  const WindowRef w = windows_.at(i);
  const Matrix& seg = segments_[w.segment];
  return seg.block(static_cast<Eigen::Index>(w.start + lookback_), 0,
                   static_cast<Eigen::Index>(horizon_), seg.cols());
}

IndexRange WindowedDataset::range(Split split) const {
  require(split_, "dataset has not been split");
  switch (split) {
    case Split::train:
      return {0, train_end_};
    case Split::val:
      return {train_end_, val_end_};
    case Split::test:
      return {val_end_, windows_.size()};
  }
  return {};
}

WindowedDataset WindowedDataset::from_samples(std::vector<Matrix> samples,
                                              std::size_t lookback, std::size_t horizon,
                                              std::size_t n_train, std::size_t n_val) {
  require(!samples.empty(), "no samples");
  require(lookback >= 2, "lookback must be >= 2");
  require(n_train + n_val <= samples.size(), "split sizes exceed the sample count");
  WindowedDataset d;
  d.lookback_ = lookback;
  d.horizon_ = horizon;
  d.channels_ = static_cast<std::size_t>(samples.front().cols());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    require(static_cast<std::size_t>(samples[s].rows()) == lookback + horizon &&
                static_cast<std::size_t>(samples[s].cols()) == d.channels_,
            "sample " + std::to_string(s) + " does not have shape (L+H) x C");
    d.windows_.push_back({static_cast<std::uint32_t>(s), 0});
  }
  d.segments_ = std::move(samples);
  d.split_ = true;
  d.train_end_ = n_train;
  d.val_end_ = n_train + n_val;
  return d;
}

WindowedDataset make_windows(const RawSeries& raw, std::size_t lookback,
                             std::size_t horizon) {
  require(lookback >= 2, "lookback must be >= 2");
  const std::size_t t = raw.rows();
  if (t < lookback + horizon) {
    fail(ErrorKind::data, "series has " + std::to_string(t) + " rows, need at least L+H = " +
                              std::to_string(lookback + horizon));
  }
  WindowedDataset d;
  d.lookback_ = lookback;
  d.horizon_ = horizon;
  d.channels_ = raw.channels();
  d.segments_.push_back(raw.values);
  const std::size_t n = t - lookback - horizon + 1;
  d.windows_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) d.windows_.push_back({0, static_cast<std::uint32_t>(i)});
  return d;
}

WindowedDataset chronological_split(WindowedDataset dataset, std::array<double, 3> ratios) {
  const std::size_t n = dataset.size();
  if (n < 10) {
    fail(ErrorKind::data, "need at least 10 windows to split, got " + std::to_string(n));
  }
  require(ratios[0] > 0.0 && ratios[1] >= 0.0 && ratios[2] >= 0.0 &&
              std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) < 1e-9,
          "split ratios must be non-negative and sum to 1");
  const auto nd = static_cast<double>(n);
  dataset.train_end_ = static_cast<std::size_t>(std::floor(ratios[0] * nd));
  dataset.val_end_ = static_cast<std::size_t>(std::floor((ratios[0] + ratios[1]) * nd + 1e-9));
  dataset.split_ = true;
  return dataset;
}

WindowedDataset zscore_fit_apply(WindowedDataset dataset) {
  require(dataset.split_, "split the dataset before fitting the z-score");
  require(!dataset.normalized_, "dataset is already normalized");
  const std::size_t c = dataset.channels_;
  const std::size_t n_train = dataset.train_end_;
  require(n_train >= 1, "train split is empty");
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < n_train; ++i) sum += dataset.input(i).colwise().sum().transpose();
  const auto count = static_cast<double>(n_train * dataset.lookback_);
  const Vector mean = sum / count;
  Vector sq = Vector::Zero(static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < n_train; ++i) {
    sq += (dataset.input(i).rowwise() - mean.transpose()).array().square().colwise().sum()
              .matrix().transpose();
  }
  const Vector stdev = ((sq / count).array() + kZscoreEpsilon).sqrt().matrix();
  for (auto& seg : dataset.segments_) {
    seg = ((seg.rowwise() - mean.transpose()).array().rowwise() / stdev.transpose().array())
              .matrix();
  }
  dataset.mean_ = mean;
  dataset.std_ = stdev;
  dataset.normalized_ = true;
  return dataset;
}

void gather_channel(const WindowedDataset& data, const std::vector<std::size_t>& indices,
                    std::size_t channel, Matrix& inputs, Matrix& targets) {
  const auto b = static_cast<Eigen::Index>(indices.size());
  const auto c = static_cast<Eigen::Index>(channel);
  inputs.resize(static_cast<Eigen::Index>(data.lookback()), b);
  targets.resize(static_cast<Eigen::Index>(data.horizon()), b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const std::size_t i = indices[static_cast<std::size_t>(j)];
    inputs.col(j) = data.input(i).col(c);
    if (data.horizon() > 0) targets.col(j) = data.target(i).col(c);
  }
}

std::vector<std::size_t> indices_of(const WindowedDataset& data, Split split) {
  const IndexRange r = data.range(split);
  std::vector<std::size_t> idx(r.size());
  std::iota(idx.begin(), idx.end(), r.begin);
  return idx;
}

}  // namespace specshift
