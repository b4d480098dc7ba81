#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "specshift/pipeline.hpp"
#include "specshift/shift_metrics.hpp"
#include "specshift/spectral.hpp"
#include "specshift/synthetic.hpp"

using namespace specshift;

namespace {

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

void BM_DftForward(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dft_forward(x));
}
// 97 and 194 take the Bluestein path.
BENCHMARK(BM_DftForward)->Arg(64)->Arg(96)->Arg(97)->Arg(194)->Arg(336)->Arg(512)->Arg(720);

void BM_DftRoundTrip(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dft_inverse(dft_forward(x)));
}
BENCHMARK(BM_DftRoundTrip)->Arg(96)->Arg(97)->Arg(512);

struct Fixture {
  WindowedDataset data;
  Batch batch;
  Pipeline pipeline;
};

Fixture make_fixture(Method method, BackboneKind backbone) {
  Fixture f{shift_benchmark_dataset(shift_benchmark_spec(0, 64, 32)), {}, {}};
  std::vector<std::size_t> idx(32);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  f.batch = make_batch(f.data, idx);
  PipelineConfig pc;
  pc.method = method;
  pc.backbone.kind = backbone;
  pc.san_epochs = 1;
  f.pipeline = make_pipeline(pc, f.data);
  if (uses_tifo(method)) {
    f.pipeline.scores = fit_scores(f.pipeline, f.data);
    f.pipeline.has_scores = true;
  }
  return f;
}

void BM_LossAndGrad(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  Fixture f = make_fixture(method, BackboneKind::dlinear);
  Pipeline grad = f.pipeline.zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(f.pipeline.loss_and_grad(f.batch, &grad));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_LossAndGrad)
    ->Arg(static_cast<int>(Method::none))
    ->Arg(static_cast<int>(Method::revin))
    ->Arg(static_cast<int>(Method::fan))
    ->Arg(static_cast<int>(Method::tifo));

void BM_ShiftReport(benchmark::State& state) {
  Fixture f = make_fixture(Method::none, BackboneKind::linear);
  const auto train = make_batch(f.data, indices_of(f.data, Split::train));
  const auto test = make_batch(f.data, indices_of(f.data, Split::test));
  const auto a = panel_from_channels(train.x, SpectralOptions{});
  const auto b = panel_from_channels(test.x, SpectralOptions{});
  for (auto _ : state) benchmark::DoNotOptimize(shift_report(a, b, 50));
}
BENCHMARK(BM_ShiftReport);

}  // namespace
BENCHMARK_MAIN();
