#pragma once

#include <span>
#include <vector>

#include "lipar/stats.hpp"
#include "lipar/tensor.hpp"

namespace lipar {

/// L1 distance over the whole patch vector (all channels, all voxels)
/// between patches at the same (y, x) in consecutive frames. Output has
/// frames() - 1 frames; entry t compares frames t and t + 1.
DeltaField temporal_delta_l1(const PatchGrid& patches);

/// L1 distance between two patch vectors, accumulated in double.
double patch_l1(std::span<const float> a, std::span<const float> b);

/// Pearson correlation between pixel-space and latent-space temporal deltas.
/// The caller scales the pixel patch so that both fields share extents.
PearsonReport pixel_latent_correlation(const DeltaField& pixel_deltas,
                                       const DeltaField& latent_deltas);

struct CompressionReport {
  double theta = 0.0;
  double compressed_fraction = 0.0;
  std::size_t replaced = 0;
  std::size_t candidates = 0;  // (T - 1) * Hp * Wp
  double fidelity_mse = 0.0;   // latent-space MSE, decoder-free proxy

  bool operator==(const CompressionReport&) const = default;
};

struct CompressionResult {
  PatchGrid patches;
  CompressionReport report;
};

/// Scans frames 1..T-1 in order. A patch whose L1 distance to the original
/// predecessor is strictly below theta takes the value already written for
/// the predecessor, so static runs collapse onto their first frame.
CompressionResult compress_latents(const PatchGrid& patches, double theta);

/// Thetas must be ascending; the sweep reuses one delta field.
std::vector<CompressionReport> compression_sweep(const PatchGrid& patches,
                                                 std::span<const double> thetas);

}  // namespace lipar
