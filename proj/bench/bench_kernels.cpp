// Serial reference vs OpenMP path for the trainer's hot loops.
// Run with --benchmark_filter=Loss etc.; OMP_NUM_THREADS controls the parallel side.

#include <benchmark/benchmark.h>

#include <vector>

#include "vpkit/circular.hpp"
#include "vpkit/glyph.hpp"
#include "vpkit/kernels.hpp"
#include "vpkit/loss.hpp"
#include "vpkit/rng.hpp"

using namespace vpkit;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  Rng rng(seed);
  for (auto& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

// Batch 256 of 64x64 inputs into 36 classes: one linear-model step.
void BM_DenseForward(benchmark::State& state) {
  const Matrix x = random_matrix(256, 4096, 1);
  const Matrix w = random_matrix(36, 4096, 2);
  const std::vector<double> b(36, 0.1);
  Matrix out(256, 36);
  for (auto _ : state) {
    kernels::dense_forward(x, w, b, out, exec_of(state));
    benchmark::DoNotOptimize(out.data.data());
  }
  label(state);
}

void BM_DenseWeightGrad(benchmark::State& state) {
  const Matrix x = random_matrix(256, 4096, 3);
  const Matrix g = random_matrix(256, 36, 4);
  Matrix gw(36, 4096);
  std::vector<double> gb(36);
  for (auto _ : state) {
    kernels::dense_weight_grad(x, g, gw, gb, exec_of(state));
    benchmark::DoNotOptimize(gw.data.data());
  }
  label(state);
}

void BM_DenseInputGrad(benchmark::State& state) {
  const Matrix g = random_matrix(256, 64, 5);
  const Matrix w = random_matrix(64, 4096, 6);
  Matrix gx(256, 4096);
  for (auto _ : state) {
    kernels::dense_input_grad(g, w, gx, exec_of(state));
    benchmark::DoNotOptimize(gx.data.data());
  }
  label(state);
}

// K = 360 is where the dense weight rows make the loss itself expensive.
void BM_LossAndGradient(benchmark::State& state) {
  const int k = 360;
  LogitsBatch b{random_matrix(256, k, 7), {}};
  Rng rng(8);
  for (int i = 0; i < 256; ++i) b.labels.push_back(static_cast<int>(rng.below(k)));
  const WeightMatrix w = build_weight_matrix(CircularLabelSpace(k), KernelConfig{});
  for (auto _ : state) {
    auto r = weighted_softmax_loss_and_gradient(b, w, exec_of(state));
    benchmark::DoNotOptimize(r.grad.data.data());
  }
  label(state);
}

void BM_GlyphFeatures(benchmark::State& state) {
  const DatasetManifest m = make_glyph_dataset(128, std::vector<double>(36, 1.0), 9);
  for (auto _ : state) {
    Matrix f = load_features(m, 64, {}, exec_of(state));
    benchmark::DoNotOptimize(f.data.data());
  }
  label(state);
}

}  // namespace

BENCHMARK(BM_DenseForward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DenseWeightGrad)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DenseInputGrad)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LossAndGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GlyphFeatures)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
