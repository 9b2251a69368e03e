#pragma once

// Prune -> denoise (toy) -> recover -> restore, plus the commutation-gap
// measurement between pruning and denoising.

#include <cstdint>
#include <optional>

#include "lipar/denoiser.hpp"
#include "lipar/lif_pruning.hpp"
#include "lipar/recovery.hpp"
#include "lipar/tensor.hpp"

namespace lipar {

/// Patch vector -> model dim map with orthonormal rows, so E^T is its
/// pseudo-inverse and project(embed(p)) == p up to rounding.
class Embedding {
 public:
  Embedding() = default;
  Embedding(int patch_length, int model_dim, std::uint64_t seed);

  const Matrix& matrix() const { return e_; }
  Matrix embed(const Matrix& patches) const;  // rows: patch vectors
  Matrix project(const Matrix& tokens) const;

 private:
  Matrix e_;   // patch_length x model_dim
  Matrix et_;  // model_dim x patch_length
};

struct PipelineConfig {
  PruneConfig prune{};
  ToyDenoiserConfig denoiser{};
  std::optional<RecoveryConfig> recovery = RecoveryConfig{};  // nullopt: direct pruning
  std::uint64_t noise_seed = 0;

  void validate() const;
};

struct PipelineStats {
  double prune_rate = 0.0;
  std::size_t tokens = 0;
  std::size_t kept_tokens = 0;
  double prune_ms = 0.0;
  double denoise_ms = 0.0;
  double restore_ms = 0.0;
  double total_ms = 0.0;
  /// Relative L2 between the restored output and the unpruned baseline.
  std::optional<double> distance_to_baseline;

  bool operator==(const PipelineStats&) const = default;
};

struct PipelineResult {
  LatentGrid output;
  KeepMaskSequence mask;
  PipelineStats stats;
};

/// Full pipeline; the mask is computed once from the input latents. With
/// `compare_baseline` the all-True run is also made and the distance stored.
PipelineResult run_pipeline(const LatentGrid& latents, const PipelineConfig& cfg,
                            bool compare_baseline = true);

/// Same with a caller-supplied mask (frame 0 must be all-True).
PipelineResult run_pipeline_with_mask(const LatentGrid& latents, const KeepMaskSequence& mask,
                                      const PipelineConfig& cfg, bool compare_baseline = true);

double relative_l2(std::span<const float> a, std::span<const float> reference);

struct CommutationGap {
  double with_recovery = 0.0;     // ||D(P(x)) - P(D(x))|| / ||P(D(x))||
  double without_recovery = 0.0;  // same with direct pruning
};

/// One denoiser application. `x` is the full token sequence in canonical
/// order over a (frames, rows, cols) grid; `recovery` must not need a cache.
CommutationGap commutation_gap(const TokenSequence& x, const KeepMaskSequence& mask,
                               const ToyDenoiser& model, const RecoveryConfig& recovery);

/// Tokens of the sequence that the mask keeps.
TokenSequence select_kept(const TokenSequence& x, const KeepMaskSequence& mask);

}  // namespace lipar
