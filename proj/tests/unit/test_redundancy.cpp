#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "lipar/fixtures.hpp"
#include "lipar/redundancy.hpp"
#include "lipar/stats.hpp"
#include "oracles/pearson_reference.hpp"

using namespace lipar;

namespace {

PatchGrid two_frames(std::vector<float> a, std::vector<float> b) {
  std::vector<float> d = a;
  d.insert(d.end(), b.begin(), b.end());
  return PatchGrid({1, 1, 1}, 2, 1, 1, static_cast<int>(a.size()), std::move(d));
}

PatchGrid staircase() {
  FixtureSpec s;
  s.kind = FixtureKind::staircase;
  s.dims = {8, 8, 8, 2};
  s.patch = {2, 2, 2};
  s.seed = 3;
  return patchify(synth_fixture(s), s.patch);
}

}  // namespace

TEST_CASE("temporal delta is the patch L1 distance") {
  const DeltaField d = temporal_delta_l1(two_frames({1, 2}, {3, 1}));
  REQUIRE(d.frames() == 1);
  CHECK(d.at(0, 0, 0) == 3.0);
  CHECK(patch_l1(std::vector<float>{1, 2}, std::vector<float>{3, 1}) == 3.0);
}

TEST_CASE("temporal delta needs two frames") {
  PatchGrid one({1, 1, 1}, 1, 2, 2, 1, std::vector<float>(4, 0.5f));
  CHECK_THROWS_AS(temporal_delta_l1(one), ValidationError);
}

TEST_CASE("pearson of identical and negated series") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  std::vector<double> x(1000), neg(1000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    neg[i] = -x[i];
  }
  CHECK(std::fabs(pearson(x, x).r - 1.0) <= 1e-12);
  CHECK(std::fabs(pearson(x, neg).r + 1.0) <= 1e-12);
}

TEST_CASE("pearson agrees with the two-pass reference") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::vector<double> x(5000), y(5000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng) * 3.0 + 100.0;
    y[i] = 0.4 * x[i] + n(rng);
  }
  CHECK(pearson(x, y).r == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
}

TEST_CASE("pearson rejects degenerate input") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> c{2, 2, 2};
  CHECK_THROWS_AS(pearson(a, c), ValidationError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), ValidationError);
}

TEST_CASE("pixel-latent correlation requires equal extents") {
  DeltaField a(2, 2, 2, 1.0), b(2, 2, 3, 1.0);
  CHECK_THROWS_AS(pixel_latent_correlation(a, b), ValidationError);
}

TEST_CASE("compression endpoints") {
  const PatchGrid p = staircase();
  const auto zero = compress_latents(p, 0.0);
  CHECK(zero.report.compressed_fraction == 0.0);
  CHECK(zero.patches == p);
  const auto inf = compress_latents(p, std::numeric_limits<double>::infinity());
  CHECK(inf.report.compressed_fraction == 1.0);
  for (int t = 1; t < p.frames(); ++t) {
    for (int y = 0; y < p.rows(); ++y) {
      for (int x = 0; x < p.cols(); ++x) {
        const auto a = inf.patches.patch(t, y, x);
        const auto b = p.patch(0, y, x);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
      }
    }
  }
}

TEST_CASE("staircase compresses its static half at theta 0.5") {
  const PatchGrid p = staircase();
  CHECK(compress_latents(p, 0.5).report.compressed_fraction == 0.5);
  CHECK(compress_latents(p, 1.5).report.compressed_fraction == 1.0);
  CHECK(compress_latents(p, 1.0).report.compressed_fraction == 0.5);  // strict comparison
}

TEST_CASE("compression sweep is non-decreasing") {
  FixtureSpec s;
  s.kind = FixtureKind::redundant_noisy;
  s.dims = {8, 8, 8, 2};
  s.noise_sigma = 0.05;
  s.seed = 5;
  const PatchGrid p = patchify(synth_fixture(s), {2, 2, 2});
  std::vector<double> thetas;
  for (int i = 0; i <= 40; ++i) thetas.push_back(0.05 * i);
  const auto sweep = compression_sweep(p, thetas);
  REQUIRE(sweep.size() == thetas.size());
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i].compressed_fraction >= sweep[i - 1].compressed_fraction);
    CHECK(sweep[i].fidelity_mse >= 0.0);
  }
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    CHECK(sweep[i] == compress_latents(p, thetas[i]).report);
  }
  const std::vector<double> descending{1.0, 0.5};
  CHECK_THROWS_AS(compression_sweep(p, descending), ValidationError);
}
