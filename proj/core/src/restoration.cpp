#include "lipar/restoration.hpp"

#include <algorithm>
#include <string>

namespace lipar {

PrunedPatchSet make_pruned_set(KeepMaskSequence mask, PatchDims patch, int channels,
                               std::vector<float> kept) {
  PrunedPatchSet set{std::move(mask), patch, channels, std::move(kept)};
  if (channels < 1 || patch.volume() < 1) {
    throw DimensionError("pruned set: patch geometry must be positive");
  }
  const std::size_t expected = set.kept_count() * static_cast<std::size_t>(set.patch_length());
  if (set.kept.size() != expected) {
    throw DimensionError("pruned set: " + std::to_string(set.kept.size()) +
                         " kept values, mask requires " + std::to_string(expected));
  }
  return set;
}

PrunedPatchSet extract_kept(const PatchGrid& patches, const KeepMaskSequence& mask) {
  if (mask.frames() != patches.frames() || mask.rows() != patches.rows() ||
      mask.cols() != patches.cols()) {
    throw DimensionError("extract_kept: mask extents differ from patch grid");
  }
  std::vector<float> kept;
  kept.reserve(count_true(mask) * static_cast<std::size_t>(patches.patch_length()));
  for (int t = 0; t < mask.frames(); ++t)
    for (int y = 0; y < mask.rows(); ++y)
      for (int x = 0; x < mask.cols(); ++x)
        if (mask.at(t, y, x)) {
          auto p = patches.patch(t, y, x);
          kept.insert(kept.end(), p.begin(), p.end());
        }
  return PrunedPatchSet{mask, patches.patch_dims(), patches.channels(), std::move(kept)};
}

PatchGrid restore(const PrunedPatchSet& pruned) {
  const auto& mask = pruned.mask;
  require_first_frame_kept(mask, "restore");
  const std::size_t len = static_cast<std::size_t>(pruned.patch_length());
  if (pruned.kept.size() != pruned.kept_count() * len) {
    throw DimensionError("restore: kept payload does not match mask");
  }
  std::vector<float> out(mask.size() * len);
  auto src = pruned.kept.begin();
  for (int t = 0; t < mask.frames(); ++t)
    for (int y = 0; y < mask.rows(); ++y)
      for (int x = 0; x < mask.cols(); ++x) {
        auto dst = out.begin() + static_cast<std::ptrdiff_t>(mask.index(t, y, x) * len);
        if (mask.at(t, y, x)) {
          std::copy_n(src, len, dst);
          src += static_cast<std::ptrdiff_t>(len);
        } else {
          auto prev = out.begin() + static_cast<std::ptrdiff_t>(mask.index(t - 1, y, x) * len);
          std::copy_n(prev, len, dst);
        }
      }
  return PatchGrid(pruned.patch, mask.frames(), mask.rows(), mask.cols(), pruned.channels,
                   std::move(out));
}

}  // namespace lipar
