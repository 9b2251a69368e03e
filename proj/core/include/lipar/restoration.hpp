#pragma once

#include <vector>

#include "lipar/tensor.hpp"

namespace lipar {

/// Kept patches plus the mask that selected them. Patches are stored in the
/// frame-major, row-major order of the True mask positions; this order is
/// part of the on-disk contract.
struct PrunedPatchSet {
  KeepMaskSequence mask;
  PatchDims patch{};
  int channels = 0;
  std::vector<float> kept;

  int patch_length() const { return patch.volume() * channels; }
  std::size_t kept_count() const { return count_true(mask); }
};

/// Checks that `kept` holds exactly one patch per True mask entry.
PrunedPatchSet make_pruned_set(KeepMaskSequence mask, PatchDims patch, int channels,
                               std::vector<float> kept);

PrunedPatchSet extract_kept(const PatchGrid& patches, const KeepMaskSequence& mask);

/// Forward-fill reconstruction: a pruned (t, y, x) takes the restored value
/// at (t - 1, y, x). Requires frame 0 all-True.
PatchGrid restore(const PrunedPatchSet& pruned);

}  // namespace lipar
