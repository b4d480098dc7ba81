#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>

#include "oracles.hpp"
#include "specshift/data.hpp"
#include "specshift/error.hpp"
#include "specshift/shift_metrics.hpp"
#include "specshift/spectral.hpp"
#include "specshift/stationarity.hpp"
#include "specshift/synthetic.hpp"

using namespace specshift;

namespace {

RawSeries counter_series(std::size_t t, std::size_t channels = 1) {
  RawSeries raw;
  raw.values.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(channels));
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t c = 0; c < channels; ++c)
      raw.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          static_cast<double>(i) + 1000.0 * static_cast<double>(c);
  for (std::size_t c = 0; c < channels; ++c) raw.channel_names.push_back("c" + std::to_string(c));
  return raw;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::invalid_argument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Csv, ThreeRowsTwoChannels) {
  const auto raw = parse_csv("a,b\n1,2\n3,4\n5,6\n");
  EXPECT_EQ(raw.rows(), 3u);
  EXPECT_EQ(raw.channels(), 2u);
  EXPECT_EQ(raw.channel_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(raw.timestamps.empty());
  EXPECT_EQ(raw.values(2, 1), 6.0);
}

TEST(Csv, LeadingDateColumnIsNotAChannel) {
  const auto raw = parse_csv("date,HUFL,OT\n2016-07-01 00:00:00,5.8,30.5\n2016-07-01 01:00:00,5.7,27.8\n");
  EXPECT_EQ(raw.channels(), 2u);
  EXPECT_EQ(raw.channel_names, (std::vector<std::string>{"HUFL", "OT"}));
  EXPECT_EQ(raw.timestamp_name, "date");
  EXPECT_EQ(raw.timestamps[1], "2016-07-01 01:00:00");
  EXPECT_EQ(raw.values(1, 1), 27.8);
}

TEST(Csv, NanRowRejectedWithIndex) {
  const auto f = [] { parse_csv("date,x\nd0,1\nd1,2\nd2,NaN\n"); };
  EXPECT_EQ(kind_of(f), ErrorKind::data);
  EXPECT_NE(message_of(f).find("row 2"), std::string::npos) << message_of(f);
}

TEST(Csv, RaggedAndEmptyInputsRejected) {
  EXPECT_EQ(kind_of([] { parse_csv("a,b\n1,2\n3\n"); }), ErrorKind::data);
  EXPECT_EQ(kind_of([] { parse_csv("date\nmon\ntue\n"); }), ErrorKind::data);
  EXPECT_EQ(kind_of([] { parse_csv(""); }), ErrorKind::data);
  EXPECT_EQ(kind_of([] { parse_csv("a,b\n"); }), ErrorKind::data);
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/specshift.csv"); }), ErrorKind::data);
}

TEST(Csv, WriteThenLoadRoundTrips) {
  const auto path = std::filesystem::temp_directory_path() / "specshift_roundtrip.csv";
  RawSeries raw;
  raw.values = oracle::random_matrix(5, 3, 4);
  raw.channel_names = {"x", "y", "z"};
  raw.timestamp_name = "t";
  raw.timestamps = {"a", "b", "c", "d", "e"};
  write_csv(path, raw);
  const auto back = load_csv(path);
  EXPECT_EQ(back.values, raw.values);
  EXPECT_EQ(back.timestamps, raw.timestamps);
  EXPECT_EQ(back.channel_names, raw.channel_names);
  std::filesystem::remove(path);
}

TEST(Windows, CountFollowsLengths) {
  EXPECT_EQ(make_windows(counter_series(5), 3, 1).size(), 2u);
  EXPECT_EQ(make_windows(counter_series(12), 8, 4).size(), 1u);
  EXPECT_EQ(kind_of([] { make_windows(counter_series(11), 8, 4); }), ErrorKind::data);
}

TEST(Windows, StrideOneOverlapAndAdjacency) {
  const auto d = make_windows(counter_series(40, 2), 6, 3);
  ASSERT_EQ(d.size(), 32u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (Eigen::Index r = 0; r < 6; ++r) ASSERT_EQ(d.input(i)(r, 0), static_cast<double>(i) + r);
    // Target starts where the input ends.
    ASSERT_EQ(d.target(i)(0, 0), d.input(i)(5, 0) + 1);
    ASSERT_EQ(d.target(i)(0, 1), 1000.0 + static_cast<double>(i + 6));
  }
  EXPECT_EQ(d.input(0).bottomRows(5), d.input(1).topRows(5));
}

TEST(Split, FloorBoundaries) {
  auto sizes = [](std::size_t n) {
    const auto d = chronological_split(make_windows(counter_series(n + 3), 3, 1));
    return std::array<std::size_t, 3>{d.range(Split::train).size(), d.range(Split::val).size(),
                                      d.range(Split::test).size()};
  };
  EXPECT_EQ(sizes(10), (std::array<std::size_t, 3>{7, 2, 1}));
  EXPECT_EQ(sizes(100), (std::array<std::size_t, 3>{70, 20, 10}));
  EXPECT_EQ(sizes(13), (std::array<std::size_t, 3>{9, 2, 2}));
  EXPECT_EQ(kind_of([] { chronological_split(make_windows(counter_series(12), 3, 1)); }),
            ErrorKind::data);
}

TEST(Split, ContiguousAndOrdered) {
  for (std::size_t n : {10u, 11u, 37u, 250u}) {
    const auto d = chronological_split(make_windows(counter_series(n + 3), 3, 1));
    const auto tr = d.range(Split::train), va = d.range(Split::val), te = d.range(Split::test);
    EXPECT_EQ(tr.begin, 0u);
    EXPECT_EQ(tr.end, va.begin);
    EXPECT_EQ(va.end, te.begin);
    EXPECT_EQ(te.end, n);
    EXPECT_LT(tr.end - 1, va.begin);
  }
  EXPECT_THROW(make_windows(counter_series(20), 3, 1).range(Split::train), Error);
}

TEST(Zscore, HandValues) {
  RawSeries raw;
  raw.values.resize(33, 1);
  for (Eigen::Index i = 0; i < 33; ++i) raw.values(i, 0) = static_cast<double>(i % 3 + 1);
  raw.channel_names = {"x"};
  const auto d = zscore_fit_apply(chronological_split(make_windows(raw, 3, 1)));
  EXPECT_DOUBLE_EQ(d.channel_mean()(0), 2.0);
  EXPECT_NEAR(d.channel_std()(0), std::sqrt(2.0 / 3.0), 1e-8);
  const auto w = d.input(0);
  EXPECT_NEAR(w(0, 0), -1.2247, 1e-4);
  EXPECT_NEAR(w(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(w(2, 0), 1.2247, 1e-4);
  EXPECT_NEAR(d.target(0)(0, 0), -1.2247, 1e-4);  // targets scale with the inputs
}

TEST(Zscore, ConstantChannelMapsToZero) {
  RawSeries raw;
  raw.values = Matrix::Constant(30, 1, 4.2);
  raw.channel_names = {"k"};
  const auto d = zscore_fit_apply(chronological_split(make_windows(raw, 4, 2)));
  for (std::size_t i = 0; i < d.size(); ++i) ASSERT_LE(d.input(i).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Zscore, StatisticsIgnoreValidationAndTest) {
  RawSeries raw;
  raw.values = oracle::random_matrix(120, 2, 1);
  raw.channel_names = {"a", "b"};
  const auto base = chronological_split(make_windows(raw, 8, 4));
  const std::size_t last_train_row = base.range(Split::train).end - 1 + 8;
  RawSeries mutated = raw;
  for (Eigen::Index r = static_cast<Eigen::Index>(last_train_row); r < 120; ++r)
    mutated.values.row(r).array() += 50.0;
  const auto a = zscore_fit_apply(base);
  const auto b = zscore_fit_apply(chronological_split(make_windows(mutated, 8, 4)));
  EXPECT_EQ(a.channel_mean(), b.channel_mean());
  EXPECT_EQ(a.channel_std(), b.channel_std());

  // Recompute the train-only statistics directly.
  std::vector<double> values;
  for (std::size_t i = 0; i < base.range(Split::train).end; ++i)
    for (Eigen::Index r = 0; r < 8; ++r) values.push_back(base.input(i)(r, 1));
  EXPECT_NEAR(a.channel_mean()(1), oracle::mean(values), 1e-12);
  EXPECT_NEAR(a.channel_std()(1), std::sqrt(oracle::pop_std(values) * oracle::pop_std(values) + 1e-8),
              1e-12);
  EXPECT_THROW(zscore_fit_apply(make_windows(raw, 8, 4)), Error);
  EXPECT_THROW(zscore_fit_apply(a), Error);
}

TEST(Synthetic, NoiselessToneHasSingleBinSupport) {
  SyntheticSpec spec;
  spec.lookback = 32;
  spec.horizon = 8;
  spec.channels = 2;
  spec.noise = 0.0;
  spec.samples_per_condition = 5;
  spec.conditions = {{{{3, 1.0}}}};
  const auto data = generate_synthetic(spec);
  for (const auto& s : data.samples[0]) {
    for (Eigen::Index c = 0; c < 2; ++c) {
      const Vector col = s.col(c).head(32);
      const auto a = amplitude(dft_forward(std::vector<double>(col.data(), col.data() + 32)));
      EXPECT_NEAR(a[3], 16.0, 1e-9);
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (k != 3) ASSERT_LE(a[k], 1e-8 * a[3]) << k;
      }
    }
  }
}

TEST(Synthetic, DeterministicForSeedAndRejectsOutOfRangeBin) {
  auto spec = shift_benchmark_spec(3);
  const auto a = generate_synthetic(spec), b = generate_synthetic(spec);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t c = 0; c < a.samples.size(); ++c)
    for (std::size_t i = 0; i < a.samples[c].size(); ++i) ASSERT_EQ(a.samples[c][i], b.samples[c][i]);
  spec.seed = 4;
  EXPECT_NE(generate_synthetic(spec).samples[0][0], a.samples[0][0]);

  SyntheticSpec bad;
  bad.lookback = 16;
  bad.conditions = {{{{9, 1.0}}}};
  EXPECT_THROW(generate_synthetic(bad), Error);
}

TEST(Synthetic, DisjointMixturesAreSeparated) {
  SyntheticSpec spec;
  spec.lookback = 32;
  spec.horizon = 8;
  spec.channels = 2;
  spec.noise = 0.3;
  spec.samples_per_condition = 50;
  spec.conditions = {{{{2, 1.0}, {3, 0.5}}}, {{{9, 1.0}, {12, 0.5}}}};
  const auto data = generate_synthetic(spec);
  auto panel_of = [&](std::size_t cond) {
    const auto& s = data.samples[cond];
    return build_panel(s.size(), [&](std::size_t i) -> MatrixRef { return s[i].topRows(32); });
  };
  const auto r = shift_report(panel_of(0), panel_of(1));
  double total = 0.0;
  for (Eigen::Index k : {2, 3, 9, 12}) total += r.ks.row(k).sum();
  EXPECT_GE(total / 8.0, 0.5);
}

TEST(Synthetic, BenchmarkDatasetLayout) {
  const auto spec = shift_benchmark_spec(0);
  const auto d = shift_benchmark_dataset(spec);
  const std::size_t n = spec.samples_per_condition;
  const std::size_t train_conditions = spec.conditions.size() - 1;
  EXPECT_EQ(d.range(Split::train).size(), train_conditions * (n - n / 5));
  EXPECT_EQ(d.range(Split::val).size(), train_conditions * (n / 5));
  EXPECT_EQ(d.range(Split::test).size(), n);
  EXPECT_TRUE(d.is_normalized());
  EXPECT_EQ(d.lookback(), 64u);
  EXPECT_EQ(d.horizon(), 32u);
}

TEST(Synthetic, ExportsToCsvShape) {
  SyntheticSpec spec;
  spec.lookback = 8;
  spec.horizon = 2;
  spec.channels = 3;
  spec.samples_per_condition = 2;
  spec.conditions = {{{{1, 1.0}}}, {{{2, 1.0}}}};
  const auto raw = synthetic_to_raw(spec, generate_synthetic(spec));
  EXPECT_EQ(raw.rows(), 40u);
  EXPECT_EQ(raw.channels(), 3u);
  EXPECT_EQ(raw.timestamps.size(), 40u);
}
