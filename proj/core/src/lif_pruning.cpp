#include "lipar/lif_pruning.hpp"

#include <string>

#include "lipar/filters.hpp"
#include "lipar/redundancy.hpp"

namespace lipar {
namespace {

void check_extent(int e, const char* name) {
  if (e < 1 || e % 2 == 0) {
    throw ValidationError(std::string("prune config: ") + name + " must be odd and >= 1");
  }
}

}  // namespace

void PruneConfig::validate() const {
  if (!(tau1 >= 0.0)) throw ValidationError("prune config: tau1 must be >= 0");
  if (!(tau2 >= 0.0)) throw ValidationError("prune config: tau2 must be >= 0");
  if (block_size < 1) throw ValidationError("prune config: block_size must be >= 1");
  if (patch.t < 1 || patch.h < 1 || patch.w < 1) {
    throw ValidationError("prune config: patch extents must be positive");
  }
  check_extent(smoothing.gaussian_extent, "gaussian_extent");
  check_extent(smoothing.median_extent, "median_extent");
  check_extent(smoothing.closing_extent, "closing_extent");
  check_extent(smoothing.dilation_extent, "dilation_extent");
  if (!(smoothing.gaussian_sigma > 0.0)) {
    throw ValidationError("prune config: gaussian_sigma must be positive");
  }
  if (smoothing.dilation_iterations < 0) {
    throw ValidationError("prune config: dilation_iterations must be >= 0");
  }
}

DiffMaskStage diff_mask_stage(const PatchGrid& a, const PatchGrid& b, double tau,
                              const SmoothingConfig& cfg) {
  if (a.frames() != b.frames() || a.rows() != b.rows() || a.cols() != b.cols() ||
      a.patch_length() != b.patch_length()) {
    throw DimensionError("diff_mask: inputs have different extents");
  }
  if (!(tau >= 0.0)) throw ValidationError("diff_mask: tau must be >= 0");
  DiffMaskStage st;
  st.raw_diff = DeltaField(a.frames(), a.rows(), a.cols());
  for (int t = 0; t < a.frames(); ++t)
    for (int y = 0; y < a.rows(); ++y)
      for (int x = 0; x < a.cols(); ++x)
        st.raw_diff.at(t, y, x) = patch_l1(a.patch(t, y, x), b.patch(t, y, x));
  st.smoothed_diff = gaussian_blur3d(st.raw_diff, cfg.gaussian_extent, cfg.gaussian_sigma);
  st.mask = BoolField(a.frames(), a.rows(), a.cols());
  for (std::size_t i = 0; i < st.mask.size(); ++i) {
    st.mask.data()[i] = st.smoothed_diff.data()[i] > tau ? 1 : 0;
  }
  return st;
}

BoolField diff_mask(const PatchGrid& a, const PatchGrid& b, double tau,
                    const SmoothingConfig& cfg) {
  return diff_mask_stage(a, b, tau, cfg).mask;
}

int long_term_offset(int t, int block_size) {
  if (t < 0 || block_size < 1) throw ValidationError("long_term_offset: need t >= 0, S >= 1");
  if (t % block_size == 0) return 1;
  return t - block_size * (t / block_size);
}

PruneStages lif_prune_stages(const PatchGrid& patches, const PruneConfig& cfg) {
  cfg.validate();
  const int T = patches.frames(), H = patches.rows(), W = patches.cols();
  PruneStages st;
  st.combined = BoolField(T, H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) st.combined.at(0, y, x) = 1;

  if (T >= 2) {
    st.short_term = diff_mask_stage(patches.frames(1, T), patches.frames(0, T - 1), cfg.tau1,
                                    cfg.smoothing);
    for (int t = 1; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          if (st.short_term.mask.at(t - 1, y, x)) st.combined.at(t, y, x) = 1;
  }

  // Frames with t <= k keep everything; once t > k it stays that way, so
  // the compared frames form one contiguous range [long_first, T).
  st.long_first = T;
  for (int t = 0; t < T; ++t) {
    if (t > long_term_offset(t, cfg.block_size)) {
      st.long_first = t;
      break;
    }
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) st.combined.at(t, y, x) = 1;
  }
  if (st.long_first < T) {
    const int n = T - st.long_first;
    const std::size_t frame_len =
        static_cast<std::size_t>(H) * W * static_cast<std::size_t>(patches.patch_length());
    std::vector<float> ref;
    ref.reserve(static_cast<std::size_t>(n) * frame_len);
    for (int t = st.long_first; t < T; ++t) {
      const int src = t - long_term_offset(t, cfg.block_size);
      auto frame = patches.data().subspan(static_cast<std::size_t>(src) * frame_len, frame_len);
      ref.insert(ref.end(), frame.begin(), frame.end());
    }
    PatchGrid past(patches.patch_dims(), n, H, W, patches.channels(), std::move(ref));
    st.long_term = diff_mask_stage(patches.frames(st.long_first, T), past, cfg.tau2, cfg.smoothing);
    for (int t = st.long_first; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          if (st.long_term.mask.at(t - st.long_first, y, x)) st.combined.at(t, y, x) = 1;
  }

  const auto& sm = cfg.smoothing;
  st.after_median = median3d(st.combined, sm.median_extent);
  st.after_closing = close2d(st.after_median, sm.closing_extent);
  st.keep = dilate3d(st.after_closing, sm.dilation_extent, sm.dilation_iterations);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) st.keep.at(0, y, x) = 1;
  return st;
}

KeepMaskSequence lif_prune(const PatchGrid& patches, const PruneConfig& cfg) {
  return lif_prune_stages(patches, cfg).keep;
}

double prune_rate(const KeepMaskSequence& mask) {
  if (mask.size() == 0) return 0.0;
  return 1.0 - static_cast<double>(count_true(mask)) / static_cast<double>(mask.size());
}

std::vector<double> prune_rate_per_frame(const KeepMaskSequence& mask) {
  std::vector<double> out(mask.frames(), 0.0);
  const double per = static_cast<double>(mask.rows()) * mask.cols();
  for (int t = 0; t < mask.frames(); ++t) {
    int kept = 0;
    for (int y = 0; y < mask.rows(); ++y)
      for (int x = 0; x < mask.cols(); ++x) kept += mask.at(t, y, x);
    out[t] = 1.0 - kept / per;
  }
  return out;
}

}  // namespace lipar
