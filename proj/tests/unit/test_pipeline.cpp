#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "lipar/fixtures.hpp"
#include "lipar/pipeline.hpp"
#include "lipar/recovery_bench.hpp"

using namespace lipar;

namespace {

LatentGrid square(std::uint64_t seed = 0) {
  FixtureSpec s;
  s.kind = FixtureKind::moving_square;
  s.dims = {16, 8, 12, 2};
  s.noise_sigma = 0.01;
  s.seed = seed;
  return synth_fixture(s);
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.denoiser.n_blocks = 1;
  c.denoiser.model_dim = 32;
  c.denoiser.heads = {2, 16};
  c.denoiser.mlp_hidden = 64;
  c.denoiser.n_steps = 2;
  return c;
}

ToyDenoiser one_block(int dim) {
  ToyDenoiserConfig d;
  d.n_blocks = 1;
  d.model_dim = dim;
  d.heads = {4, dim / 4};
  d.mlp_hidden = 2 * dim;
  return ToyDenoiser(d);
}

}  // namespace

TEST_CASE("embedding round trip") {
  const Embedding e(16, 64, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g;
  Matrix p(5, 16);
  for (auto& v : p.data()) v = g(rng);
  const Matrix back = e.project(e.embed(p));
  for (std::size_t i = 0; i < p.data().size(); ++i) CHECK(back.data()[i] == doctest::Approx(p.data()[i]).epsilon(1e-5));
  CHECK_THROWS_AS(Embedding(65, 64, 0), ValidationError);
}

TEST_CASE("all-True mask reproduces the baseline") {
  const LatentGrid g = square();
  const PipelineConfig c = small_config();
  const auto r = run_pipeline_with_mask(g, all_true(8, 4, 6), c, true);
  REQUIRE(r.stats.distance_to_baseline.has_value());
  CHECK(*r.stats.distance_to_baseline == 0.0);
  CHECK(r.stats.prune_rate == 0.0);
  PipelineConfig base = c;
  base.recovery.reset();
  CHECK(run_pipeline_with_mask(g, all_true(8, 4, 6), base, false).output == r.output);
}

TEST_CASE("pipeline is deterministic and reports its mask") {
  const LatentGrid g = square(2);
  const PipelineConfig c = small_config();
  const auto a = run_pipeline(g, c, false);
  const auto b = run_pipeline(g, c, false);
  CHECK(a.output == b.output);
  CHECK(a.mask == lif_prune(patchify(g, c.prune.patch), c.prune));
  CHECK(a.stats.tokens == 8u * 4u * 6u);
  CHECK(a.stats.kept_tokens == count_true(a.mask));
  CHECK(a.output.dims() == g.dims());
  CHECK_FALSE(a.stats.distance_to_baseline.has_value());
}

TEST_CASE("pruned positions of the output are forward filled") {
  const LatentGrid g = square(3);
  const PipelineConfig c = small_config();
  const auto r = run_pipeline(g, c, false);
  const PatchGrid p = patchify(r.output, c.prune.patch);
  for (int t = 1; t < p.frames(); ++t)
    for (int y = 0; y < p.rows(); ++y)
      for (int x = 0; x < p.cols(); ++x) {
        if (r.mask.at(t, y, x)) continue;
        const auto a = p.patch(t, y, x);
        const auto b = p.patch(t - 1, y, x);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
      }
}

TEST_CASE("commutation gap vanishes for the all-True mask") {
  RecoveryBenchConfig bc;
  bc.frames = 8;
  bc.rows = 4;
  bc.cols = 4;
  bc.model_dim = 32;
  bc.perturbation = 0.2;
  const TokenSequence x = recovery_fixture(bc).noisy;
  const auto gap = commutation_gap(x, all_true(8, 4, 4), one_block(32), RecoveryConfig{});
  CHECK(gap.with_recovery == 0.0);
  CHECK(gap.without_recovery == 0.0);
}

TEST_CASE("commutation gap with full recovery on a redundant sequence") {
  RecoveryBenchConfig bc;
  bc.frames = 8;
  bc.rows = 4;
  bc.cols = 4;
  bc.model_dim = 32;
  const TokenSequence x = recovery_fixture(bc).noisy;
  const auto mask = pattern_mask(parse_prune_pattern("every:4"), 8, 4, 4, 0);
  const auto gap = commutation_gap(x, mask, one_block(32), RecoveryConfig{std::nullopt, false});
  CHECK(gap.with_recovery <= 1e-4);
  CHECK(gap.without_recovery > gap.with_recovery);
}

TEST_CASE("relative l2") {
  const std::vector<float> a{3, 4}, b{0, 0};
  CHECK(relative_l2(a, a) == 0.0);
  CHECK(relative_l2(b, a) == 1.0);
  CHECK_THROWS_AS(relative_l2(a, std::vector<float>{1}), DimensionError);
}

TEST_CASE("pipeline config validation") {
  PipelineConfig c = small_config();
  c.denoiser.initial_noise = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small_config();
  c.denoiser.residual_scale = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small_config();
  c.prune.patch = {3, 2, 2};
  CHECK_THROWS_AS(run_pipeline(square(), c, false), DimensionError);
}
