// Microbenchmarks for the hot paths. Worker parallelism is pinned to 1.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "lipar/attention.hpp"
#include "lipar/fixtures.hpp"
#include "lipar/latency.hpp"
#include "lipar/lif_pruning.hpp"
#include "lipar/parallel.hpp"
#include "lipar/recovery.hpp"
#include "lipar/restoration.hpp"

using namespace lipar;

namespace {

Matrix random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> nd;
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = nd(rng);
  return m;
}

std::vector<int> frames_of(int n, int per_frame) {
  std::vector<int> f(n);
  for (int i = 0; i < n; ++i) f[i] = i / per_frame;
  return f;
}

}  // namespace

static void BM_ExactAttention(benchmark::State& state) {
  set_worker_threads(1);
  const int n = static_cast<int>(state.range(0));
  const HeadConfig heads{4, 16};
  const Matrix q = random_matrix(n, heads.width(), 1);
  const Matrix k = random_matrix(n, heads.width(), 2);
  const Matrix v = random_matrix(n, heads.width(), 3);
  const auto f = frames_of(n, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_attention(q, f, k, v, f, heads, true));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_ExactAttention)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_LifPrune(benchmark::State& state) {
  set_worker_threads(1);
  FixtureSpec spec;
  spec.kind = FixtureKind::moving_square;
  spec.dims = GridDims{static_cast<int>(state.range(0)), 32, 32, 4};
  spec.noise_sigma = 0.01;
  const PatchGrid grid = patchify(synth_fixture(spec), spec.patch);
  const PruneConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(lif_prune(grid, cfg));
}
BENCHMARK(BM_LifPrune)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_Restore(benchmark::State& state) {
  set_worker_threads(1);
  FixtureSpec spec;
  spec.kind = FixtureKind::moving_square;
  spec.dims = GridDims{32, 32, 32, 4};
  const PatchGrid grid = patchify(synth_fixture(spec), spec.patch);
  const PrunedPatchSet set = extract_kept(grid, lif_prune(grid, PruneConfig{}));
  for (auto _ : state) benchmark::DoNotOptimize(restore(set));
}
BENCHMARK(BM_Restore)->Unit(benchmark::kMicrosecond);

static void BM_Expansion(benchmark::State& state) {
  set_worker_threads(1);
  const int frames = 16, rows = 16, cols = 16;
  const HeadConfig heads{4, 16};
  const KeepMaskSequence mask = synthetic_mask(frames, rows, cols, 0.4, 7);
  const RunLengthPlan plan = build_plan(mask);
  std::vector<Position> pos;
  for (int t = 0; t < frames; ++t)
    for (int y = 0; y < rows; ++y)
      for (int x = 0; x < cols; ++x)
        if (mask.at(t, y, x)) pos.push_back({t, y, x});
  const int n = static_cast<int>(pos.size());
  const Matrix k = random_matrix(n, heads.width(), 4);
  const Matrix v = random_matrix(n, heads.width(), 5);
  const ActiveTokens active{pos, &k, &v};
  RecoveryConfig rec;
  rec.noise_aware = false;
  if (state.range(0) > 0) rec.degree = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_keys(active, FrameSpan{0, frames}, rows, cols, &plan,
                                           nullptr, rec, RoPEConfig{}, heads));
  }
}
BENCHMARK(BM_Expansion)->Arg(1)->Arg(2)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
