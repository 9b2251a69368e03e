#include <random>
#include <vector>

#include "doctest.h"
#include "lipar/fixtures.hpp"
#include "lipar/lif_pruning.hpp"
#include "lipar/restoration.hpp"
#include "oracles/restore_reference.hpp"

using namespace lipar;

namespace {

PatchGrid random_patches(int T, int H, int W, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(static_cast<std::size_t>(T) * H * W * 4);
  for (auto& e : v) e = u(rng);
  return PatchGrid({1, 2, 2}, T, H, W, 1, std::move(v));
}

KeepMaskSequence random_mask(int T, int H, int W, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(p);
  KeepMaskSequence m(T, H, W, 0);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) m.at(t, y, x) = (t == 0 || keep(rng)) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("restore matches scan-back on random masks") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 100; ++i) {
    const PatchGrid p = random_patches(12, 5, 6, 100 + i);
    const KeepMaskSequence m = random_mask(12, 5, 6, 0.1 + 0.008 * i, rng);
    const PatchGrid r = restore(extract_kept(p, m));
    const auto ref = oracle::scan_back_restore(p, m);
    REQUIRE(r.data().size() == ref.size());
    CHECK(std::equal(ref.begin(), ref.end(), r.data().begin()));
  }
}

TEST_CASE("prune then restore is bit-exact on redundant grids") {
  FixtureSpec s;
  s.kind = FixtureKind::static_scene;
  s.dims = {16, 8, 8, 2};
  s.seed = 8;
  const PatchGrid p = patchify(synth_fixture(s), {2, 2, 2});
  const KeepMaskSequence m = lif_prune(p, PruneConfig{});
  CHECK(prune_rate(m) >= 0.5);
  CHECK(restore(extract_kept(p, m)) == p);
}

TEST_CASE("restore keeps kept patches and requires frame 0") {
  const PatchGrid p = random_patches(3, 2, 2, 5);
  KeepMaskSequence all = all_true(3, 2, 2);
  CHECK(restore(extract_kept(p, all)) == p);
  KeepMaskSequence bad = all;
  bad.at(0, 1, 1) = 0;
  CHECK_THROWS_AS(restore(extract_kept(p, bad)), ValidationError);
}

TEST_CASE("pruned set payload must match the mask") {
  KeepMaskSequence m = all_true(2, 1, 1);
  m.at(1, 0, 0) = 0;
  CHECK_THROWS_AS(make_pruned_set(m, {1, 1, 1}, 1, std::vector<float>(2)), ValidationError);
  const PrunedPatchSet ok = make_pruned_set(m, {1, 1, 1}, 1, std::vector<float>{4.0f});
  const PatchGrid r = restore(ok);
  CHECK(r.patch(1, 0, 0)[0] == 4.0f);
}
