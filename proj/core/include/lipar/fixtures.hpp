#pragma once

// Deterministic synthetic latents. Every kind is a closed-form function of
// the spec and its seed.
//
//   static              base frame (uniform [-1, 1]) repeated over time
//   moving-square       zero background; a block of 2x2 patches with value
//                       `amplitude` whose top-left patch sits at row
//                       Hp/2 - 1, col (tp mod (Wp - 1)) in patch frame tp;
//                       plus N(0, noise_sigma^2) per element
//   staircase           left half of the patch columns static (uniform base),
//                       right half constant within a patch and rising by
//                       1/P per element each patch frame, so its patch L1
//                       delta is exactly 1 (P = patch length, a power of 2)
//   redundant-noisy     static base plus independent N(0, noise_sigma^2) per
//                       element and frame
//   linear-gaussian-pair  pixel/latent pair, C = 1: per location and step the
//                       pixel moves by A ~ U(1, 3) and the latent by
//                       slope * A + N(0, noise_sigma^2), each with a random sign

#include <cstdint>
#include <string>
#include <string_view>

#include "lipar/tensor.hpp"

namespace lipar {

enum class FixtureKind { static_scene, moving_square, staircase, redundant_noisy, linear_gaussian_pair };

FixtureKind parse_fixture_kind(std::string_view name);
std::string_view to_string(FixtureKind kind);

struct FixtureSpec {
  FixtureKind kind = FixtureKind::static_scene;
  GridDims dims{8, 16, 16, 2};
  PatchDims patch{2, 2, 2};
  double amplitude = 1.0;
  double noise_sigma = 0.0;
  double slope = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FixturePair {
  LatentGrid pixel;
  LatentGrid latent;
};

/// Throws ValidationError for linear-gaussian-pair (use synth_pair).
LatentGrid synth_fixture(const FixtureSpec& spec);
FixturePair synth_pair(const FixtureSpec& spec);

/// Top-left patch (row, col) of the moving square in patch frame tp.
struct PatchCell {
  int y = 0;
  int x = 0;
};
PatchCell moving_square_cell(const FixtureSpec& spec, int patch_frame);

/// Closed-form Pearson r between |pixel delta| and |latent delta| for the
/// linear-gaussian-pair model (valid while slope >> noise_sigma).
double linear_gaussian_rho(double slope, double sigma);

}  // namespace lipar
