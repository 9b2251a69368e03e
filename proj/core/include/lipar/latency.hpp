#pragma once

// Wall-clock latency of one denoiser pass against the kept-token fraction.

#include <cstdint>
#include <optional>
#include <vector>

#include "lipar/denoiser.hpp"
#include "lipar/recovery.hpp"
#include "lipar/tensor.hpp"

namespace lipar {

struct LatencySweepConfig {
  ToyDenoiserConfig denoiser{.n_blocks = 12};
  int frames = 16;  // patch frames; tokens = frames * rows * cols
  int rows = 16;
  int cols = 16;
  std::vector<double> fractions{0.2, 0.4, 0.6, 0.8, 1.0};
  int runs = 10;
  int warmup = 1;  // untimed runs before the first fraction
  std::uint64_t seed = 0;
  RecoveryConfig recovery{std::nullopt, false};  // full duplication from kept tokens

  void validate() const;
};

struct LatencySample {
  double kept_fraction = 0.0;  // requested
  std::size_t kept_tokens = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double median_ms = 0.0;

  bool operator==(const LatencySample&) const = default;
};

struct LatencyCurve {
  std::vector<LatencySample> samples;
  double slope = 0.0;      // ms per unit kept fraction
  double intercept = 0.0;  // ms
  double r = 0.0;          // Pearson r of (kept_fraction, mean_ms)
  bool monotone = false;   // means non-decreasing within 2% slack

  bool operator==(const LatencyCurve&) const = default;
};

/// Mask with frame 0 fully kept plus uniformly random extra positions, for a
/// total of round(fraction * N) kept tokens. Throws if the fraction is below
/// the share of frame 0.
KeepMaskSequence synthetic_mask(int frames, int rows, int cols, double fraction,
                                std::uint64_t seed);

/// Single-threaded. Throws NumericalError when a run is too short for the
/// clock to resolve.
LatencyCurve latency_sweep(const LatencySweepConfig& cfg);

}  // namespace lipar
