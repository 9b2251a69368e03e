#include "lipar/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lipar {

double patch_l1(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  }
  return s;
}

DeltaField temporal_delta_l1(const PatchGrid& patches) {
  if (patches.frames() < 2) {
    throw ValidationError("temporal_delta_l1: need at least two frames, got " +
                          std::to_string(patches.frames()));
  }
  DeltaField out(patches.frames() - 1, patches.rows(), patches.cols());
  for (int t = 0; t + 1 < patches.frames(); ++t)
    for (int y = 0; y < patches.rows(); ++y)
      for (int x = 0; x < patches.cols(); ++x)
        out.at(t, y, x) = patch_l1(patches.patch(t, y, x), patches.patch(t + 1, y, x));
  return out;
}

PearsonReport pixel_latent_correlation(const DeltaField& pixel_deltas,
                                       const DeltaField& latent_deltas) {
  if (!pixel_deltas.same_shape(latent_deltas)) {
    throw DimensionError("pixel_latent_correlation: delta fields have different extents");
  }
  return pearson(pixel_deltas.data(), latent_deltas.data());
}

namespace {

CompressionResult compress_with_deltas(const PatchGrid& patches, const DeltaField* deltas,
                                       double theta) {
  if (!(theta >= 0.0)) throw ValidationError("compress_latents: theta must be >= 0");
  std::vector<float> out(patches.data().begin(), patches.data().end());
  const std::size_t len = static_cast<std::size_t>(patches.patch_length());
  CompressionReport rep;
  rep.theta = theta;
  rep.candidates = static_cast<std::size_t>(patches.frames() - 1) * patches.rows() * patches.cols();
  for (int t = 1; t < patches.frames(); ++t)
    for (int y = 0; y < patches.rows(); ++y)
      for (int x = 0; x < patches.cols(); ++x) {
        const double d = deltas ? deltas->at(t - 1, y, x)
                                : patch_l1(patches.patch(t, y, x), patches.patch(t - 1, y, x));
        if (d < theta) {
          auto dst = out.begin() + static_cast<std::ptrdiff_t>(patches.patch_index(t, y, x) * len);
          auto src = out.begin() + static_cast<std::ptrdiff_t>(patches.patch_index(t - 1, y, x) * len);
          std::copy_n(src, len, dst);
          ++rep.replaced;
        }
      }
  rep.compressed_fraction =
      rep.candidates == 0 ? 0.0 : static_cast<double>(rep.replaced) / static_cast<double>(rep.candidates);
  double se = 0.0;
  auto orig = patches.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = static_cast<double>(out[i]) - orig[i];
    se += e * e;
  }
  rep.fidelity_mse = se / static_cast<double>(out.size());
  return {PatchGrid(patches.patch_dims(), patches.frames(), patches.rows(), patches.cols(),
                    patches.channels(), std::move(out)),
          rep};
}

}  // namespace

CompressionResult compress_latents(const PatchGrid& patches, double theta) {
  return compress_with_deltas(patches, nullptr, theta);
}

std::vector<CompressionReport> compression_sweep(const PatchGrid& patches,
                                                 std::span<const double> thetas) {
  if (!std::is_sorted(thetas.begin(), thetas.end())) {
    throw ValidationError("compression_sweep: thetas must be sorted ascending");
  }
  std::vector<CompressionReport> out;
  out.reserve(thetas.size());
  if (patches.frames() < 2) {
    for (double th : thetas) out.push_back(compress_latents(patches, th).report);
    return out;
  }
  const DeltaField deltas = temporal_delta_l1(patches);
  for (double th : thetas) out.push_back(compress_with_deltas(patches, &deltas, th).report);
  return out;
}

}  // namespace lipar
