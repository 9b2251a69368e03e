#pragma once

#include <vector>

#include "lipar/tensor.hpp"

namespace lipar {

/// Kernel sizes for the mask smoothing chain. All extents odd and >= 1.
struct SmoothingConfig {
  int gaussian_extent = 3;
  double gaussian_sigma = 1.0;
  int median_extent = 3;
  int closing_extent = 3;
  int dilation_extent = 3;
  int dilation_iterations = 1;
};

struct PruneConfig {
  double tau1 = 0.15;  // short-term (consecutive frame) threshold
  double tau2 = 0.3;   // long-term threshold
  int block_size = 3;  // denoising block size S, in patch frames
  PatchDims patch{2, 2, 2};
  SmoothingConfig smoothing{};

  /// Throws ValidationError if a field is out of range.
  void validate() const;
};

/// One GetDiffMask evaluation, kept whole for debugging and golden tests.
struct DiffMaskStage {
  DeltaField raw_diff;
  DeltaField smoothed_diff;
  BoolField mask;  // True where smoothed_diff > tau (changed -> keep)
};

/// Per-location L1 diff between two equally shaped patch stacks, Gaussian
/// smoothed in (t, y, x) with zero padding, thresholded at tau.
DiffMaskStage diff_mask_stage(const PatchGrid& a, const PatchGrid& b, double tau,
                              const SmoothingConfig& cfg);
BoolField diff_mask(const PatchGrid& a, const PatchGrid& b, double tau,
                    const SmoothingConfig& cfg);

/// Temporal offset of the long-term comparison for frame t:
/// 1 when t is a multiple of S, t mod S otherwise.
int long_term_offset(int t, int block_size);

struct PruneStages {
  DiffMaskStage short_term;  // covers frames [1, T); empty when T == 1
  DiffMaskStage long_term;   // covers frames [long_first, T); empty if none
  int long_first = 0;        // first frame compared against X_{t-k}
  BoolField combined;        // short OR long, guard frames forced True
  BoolField after_median;
  BoolField after_closing;
  BoolField keep;            // after 3-D dilation, frame 0 forced True
};

PruneStages lif_prune_stages(const PatchGrid& patches, const PruneConfig& cfg);
KeepMaskSequence lif_prune(const PatchGrid& patches, const PruneConfig& cfg);

/// Fraction of False entries over all T * Hp * Wp positions.
double prune_rate(const KeepMaskSequence& mask);
/// Same, per frame.
std::vector<double> prune_rate_per_frame(const KeepMaskSequence& mask);

}  // namespace lipar
