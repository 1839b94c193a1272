// Serial reference path vs OpenMP path for the data-parallel kernels.
//   ./nucseg_bench --benchmark_filter=edt

#include <benchmark/benchmark.h>

#include "nucseg/edt.hpp"
#include "nucseg/evaluate.hpp"
#include "nucseg/filters.hpp"
#include "nucseg/synth.hpp"
#include "nucseg/targets.hpp"

using namespace nucseg;

namespace {

const LabelVolume& scene() {
  static const LabelVolume labels = [] {
    Preset p = preset("em-like");
    p.config.rng_seed = 1;
    return generate_labels(p.config).labels;
  }();
  return labels;
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void label_args(benchmark::internal::Benchmark* b) {
  b->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
}

void BM_squared_edt(benchmark::State& state) {
  Mask m(scene().shape());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = scene()[i] == 0;
  for (auto _ : state) benchmark::DoNotOptimize(squared_edt(m, false, exec_of(state)));
}
BENCHMARK(BM_squared_edt)->Apply(label_args);

void BM_contour_map(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(contour_map(scene(), {}, exec_of(state)));
}
BENCHMARK(BM_contour_map)->Apply(label_args);

void BM_box_blur(benchmark::State& state) {
  const ProbVolume fg = foreground_mask(scene());
  for (auto _ : state) benchmark::DoNotOptimize(box_blur(fg, 1, exec_of(state)));
}
BENCHMARK(BM_box_blur)->Apply(label_args);

void BM_overlap_table(benchmark::State& state) {
  SynthConfig shifted = preset("em-like").config;
  shifted.rng_seed = 2;
  const LabelVolume other = generate_labels(shifted).labels;
  for (auto _ : state) {
    benchmark::DoNotOptimize(overlap_table(scene(), other, nullptr, exec_of(state)));
  }
}
BENCHMARK(BM_overlap_table)->Apply(label_args);

void BM_render_image(benchmark::State& state) {
  const IntensityModel m = preset("em-like").intensity;
  for (auto _ : state) benchmark::DoNotOptimize(render_image(scene(), m, 3, exec_of(state)));
}
BENCHMARK(BM_render_image)->Apply(label_args);

}  // namespace

BENCHMARK_MAIN();
