#include "lipar/fixtures.hpp"

#include <cmath>
#include <random>

#include "lipar/random.hpp"

namespace lipar {
namespace {

std::vector<float> base_frame(const GridDims& d, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<float> f(static_cast<std::size_t>(d.rows) * d.cols * d.channels);
  for (auto& v : f) v = static_cast<float>(u(rng));
  return f;
}

LatentGrid repeat_with_noise(const GridDims& d, const std::vector<float>& frame, double sigma,
                             Rng& rng) {
  std::normal_distribution<double> nd(0.0, sigma > 0.0 ? sigma : 1.0);
  std::vector<float> out;
  out.reserve(d.size());
  for (int t = 0; t < d.frames; ++t)
    for (float v : frame) out.push_back(sigma > 0.0 ? static_cast<float>(v + nd(rng)) : v);
  return LatentGrid(d, std::move(out));
}

}  // namespace

FixtureKind parse_fixture_kind(std::string_view name) {
  if (name == "static") return FixtureKind::static_scene;
  if (name == "moving-square") return FixtureKind::moving_square;
  if (name == "staircase") return FixtureKind::staircase;
  if (name == "redundant-noisy") return FixtureKind::redundant_noisy;
  if (name == "linear-gaussian-pair") return FixtureKind::linear_gaussian_pair;
  throw ValidationError("unknown fixture kind '" + std::string(name) + "'");
}

std::string_view to_string(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::static_scene: return "static";
    case FixtureKind::moving_square: return "moving-square";
    case FixtureKind::staircase: return "staircase";
    case FixtureKind::redundant_noisy: return "redundant-noisy";
    case FixtureKind::linear_gaussian_pair: return "linear-gaussian-pair";
  }
  return "?";
}

void FixtureSpec::validate() const {
  if (dims.frames < 1 || dims.rows < 1 || dims.cols < 1 || dims.channels < 1) {
    throw DimensionError("fixture: extents must all be >= 1");
  }
  if (patch.t < 1 || patch.h < 1 || patch.w < 1) throw DimensionError("fixture: bad patch extents");
  if (!(noise_sigma >= 0.0)) throw ValidationError("fixture: noise_sigma must be >= 0");
  const bool patched = kind == FixtureKind::moving_square || kind == FixtureKind::staircase;
  if (patched && (dims.frames % patch.t || dims.rows % patch.h || dims.cols % patch.w)) {
    throw DimensionError("fixture: extents must be divisible by the patch");
  }
  if (kind == FixtureKind::moving_square &&
      (dims.rows / patch.h < 2 || dims.cols / patch.w < 3)) {
    throw DimensionError("moving-square: needs at least 2 patch rows and 3 patch cols");
  }
  if (kind == FixtureKind::staircase && dims.cols / patch.w < 2) {
    throw DimensionError("staircase: needs at least 2 patch cols");
  }
  if (kind == FixtureKind::linear_gaussian_pair && dims.channels != 1) {
    throw DimensionError("linear-gaussian-pair: channels must be 1");
  }
}

PatchCell moving_square_cell(const FixtureSpec& spec, int patch_frame) {
  const int hp = spec.dims.rows / spec.patch.h;
  const int wp = spec.dims.cols / spec.patch.w;
  return {hp / 2 - 1, patch_frame % (wp - 1)};
}

LatentGrid synth_fixture(const FixtureSpec& spec) {
  spec.validate();
  const GridDims& d = spec.dims;
  Rng rng(derive_seed(spec.seed, {static_cast<int>(spec.kind)}));
  switch (spec.kind) {
    case FixtureKind::static_scene:
      return repeat_with_noise(d, base_frame(d, rng), 0.0, rng);
    case FixtureKind::redundant_noisy:
      return repeat_with_noise(d, base_frame(d, rng), spec.noise_sigma, rng);
    case FixtureKind::moving_square: {
      std::normal_distribution<double> nd(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
      std::vector<float> out(d.size(), 0.0f);
      for (int t = 0; t < d.frames; ++t) {
        const PatchCell c = moving_square_cell(spec, t / spec.patch.t);
        const int y0 = c.y * spec.patch.h, x0 = c.x * spec.patch.w;
        for (int y = y0; y < y0 + 2 * spec.patch.h; ++y)
          for (int x = x0; x < x0 + 2 * spec.patch.w; ++x)
            for (int ch = 0; ch < d.channels; ++ch)
              out[d.index(t, y, x, ch)] = static_cast<float>(spec.amplitude);
      }
      if (spec.noise_sigma > 0.0) {
        for (auto& v : out) v = static_cast<float>(v + nd(rng));
      }
      return LatentGrid(d, std::move(out));
    }
    case FixtureKind::staircase: {
      const std::vector<float> base = base_frame(d, rng);
      const double step = 1.0 / (spec.patch.volume() * d.channels);
      const int split = (d.cols / spec.patch.w) / 2 * spec.patch.w;
      std::vector<float> out(d.size());
      for (int t = 0; t < d.frames; ++t)
        for (int y = 0; y < d.rows; ++y)
          for (int x = 0; x < d.cols; ++x)
            for (int ch = 0; ch < d.channels; ++ch) {
              const std::size_t i = d.index(t, y, x, ch);
              out[i] = x < split ? base[d.index(0, y, x, ch)]
                                 : static_cast<float>((t / spec.patch.t) * step);
            }
      return LatentGrid(d, std::move(out));
    }
    case FixtureKind::linear_gaussian_pair:
      throw ValidationError("linear-gaussian-pair produces two grids; use synth_pair");
  }
  throw ValidationError("unhandled fixture kind");
}

FixturePair synth_pair(const FixtureSpec& spec) {
  spec.validate();
  if (spec.kind != FixtureKind::linear_gaussian_pair) {
    LatentGrid g = synth_fixture(spec);
    return {g, g};
  }
  const GridDims& d = spec.dims;
  Rng rng(derive_seed(spec.seed, {static_cast<int>(spec.kind)}));
  std::uniform_real_distribution<double> mag(1.0, 3.0);
  std::normal_distribution<double> nd(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
  std::bernoulli_distribution flip(0.5);
  const std::size_t plane = static_cast<std::size_t>(d.rows) * d.cols;
  std::vector<double> px(plane, 0.0), lt(plane, 0.0);
  std::vector<float> pixel, latent;
  pixel.reserve(d.size());
  latent.reserve(d.size());
  for (int t = 0; t < d.frames; ++t) {
    if (t > 0) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double a = mag(rng);
        const double b = spec.slope * a + (spec.noise_sigma > 0.0 ? nd(rng) : 0.0);
        px[i] += flip(rng) ? a : -a;
        lt[i] += flip(rng) ? b : -b;
      }
    }
    for (std::size_t i = 0; i < plane; ++i) {
      pixel.push_back(static_cast<float>(px[i]));
      latent.push_back(static_cast<float>(lt[i]));
    }
  }
  return {LatentGrid(d, std::move(pixel)), LatentGrid(d, std::move(latent))};
}

double linear_gaussian_rho(double slope, double sigma) {
  const double var_a = 4.0 / 12.0;  // U(1, 3)
  return slope * std::sqrt(var_a) / std::sqrt(slope * slope * var_a + sigma * sigma);
}

}  // namespace lipar
