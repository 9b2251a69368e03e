#include <cmath>
#include <vector>

#include "doctest.h"
#include "lipar/fixtures.hpp"
#include "lipar/redundancy.hpp"

using namespace lipar;

TEST_CASE("static fixture repeats its first frame") {
  FixtureSpec s;
  s.dims = {6, 4, 4, 3};
  s.seed = 2;
  const LatentGrid g = synth_fixture(s);
  for (int t = 1; t < 6; ++t)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x)
        for (int c = 0; c < 3; ++c) CHECK(g.at(t, y, x, c) == g.at(0, y, x, c));
  for (float v : g.data()) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("moving square follows its closed form") {
  FixtureSpec s;
  s.kind = FixtureKind::moving_square;
  s.dims = {12, 8, 10, 1};
  s.patch = {2, 2, 2};
  s.amplitude = 2.5;
  const LatentGrid g = synth_fixture(s);
  // Hp = 4, Wp = 5: top-left patch row 1, col tp mod 4.
  for (int tp = 0; tp < 6; ++tp) {
    const PatchCell c = moving_square_cell(s, tp);
    CHECK(c.y == 1);
    CHECK(c.x == tp % 4);
    for (int t = 2 * tp; t < 2 * tp + 2; ++t)
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 10; ++x) {
          const bool inside = y >= 2 && y < 6 && x >= 2 * c.x && x < 2 * c.x + 4;
          CHECK(g.at(t, y, x, 0) == (inside ? 2.5f : 0.0f));
        }
  }
}

TEST_CASE("staircase deltas are exactly zero and one") {
  FixtureSpec s;
  s.kind = FixtureKind::staircase;
  s.dims = {8, 4, 8, 2};
  s.patch = {2, 2, 2};
  s.seed = 6;
  const DeltaField d = temporal_delta_l1(patchify(synth_fixture(s), s.patch));
  for (int t = 0; t < d.frames(); ++t)
    for (int y = 0; y < d.rows(); ++y)
      for (int x = 0; x < d.cols(); ++x) CHECK(d.at(t, y, x) == (x < 2 ? 0.0 : 1.0));
}

TEST_CASE("redundant-noisy adds the requested noise") {
  FixtureSpec s;
  s.kind = FixtureKind::redundant_noisy;
  s.dims = {16, 32, 32, 2};
  s.noise_sigma = 0.1;
  s.seed = 3;
  const LatentGrid a = synth_fixture(s);
  double ss = 0.0;
  std::size_t n = 0;
  for (int t = 1; t < 16; ++t)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        for (int c = 0; c < 2; ++c) {
          const double d = a.at(t, y, x, c) - a.at(t - 1, y, x, c);
          ss += d * d;
          ++n;
        }
  // Frame differences carry twice the noise variance.
  CHECK(std::sqrt(ss / n) == doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("linear-gaussian pair reproduces its closed-form correlation") {
  FixtureSpec s;
  s.kind = FixtureKind::linear_gaussian_pair;
  s.dims = {11, 100, 100, 1};
  s.slope = 0.8;
  s.noise_sigma = 0.3;
  s.seed = 12;
  const FixturePair p = synth_pair(s);
  const PatchDims unit{1, 1, 1};
  const PearsonReport r =
      pixel_latent_correlation(temporal_delta_l1(patchify(p.pixel, unit)),
                               temporal_delta_l1(patchify(p.latent, unit)));
  CHECK(r.n_samples == 100000u);
  CHECK(std::fabs(r.r - linear_gaussian_rho(0.8, 0.3)) <= 0.02);
  CHECK_THROWS_AS(synth_fixture(s), ValidationError);
}

TEST_CASE("fixtures are deterministic in their seed") {
  FixtureSpec s;
  s.kind = FixtureKind::redundant_noisy;
  s.noise_sigma = 0.2;
  s.seed = 4;
  CHECK(synth_fixture(s) == synth_fixture(s));
  FixtureSpec t = s;
  t.seed = 5;
  CHECK_FALSE(synth_fixture(s) == synth_fixture(t));
}

TEST_CASE("fixture kinds parse and validate") {
  for (auto k : {FixtureKind::static_scene, FixtureKind::moving_square, FixtureKind::staircase,
                 FixtureKind::redundant_noisy, FixtureKind::linear_gaussian_pair}) {
    CHECK(parse_fixture_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_fixture_kind("plasma"), ValidationError);
  FixtureSpec s;
  s.kind = FixtureKind::moving_square;
  s.dims = {4, 2, 8, 1};
  CHECK_THROWS_AS(synth_fixture(s), DimensionError);
}
