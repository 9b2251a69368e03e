#pragma once

// Fixed-weight stand-in for a causal video diffusion transformer. Each block
// is pre-norm causal MSA followed by a pre-norm tanh MLP, both residual. The
// RMS norm and MLP act per token, so only attention mixes tokens.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lipar/attention.hpp"
#include "lipar/kv_cache.hpp"
#include "lipar/recovery.hpp"
#include "lipar/rope.hpp"
#include "lipar/tensor.hpp"

namespace lipar {

struct ToyDenoiserConfig {
  int n_blocks = 2;
  int model_dim = 64;
  HeadConfig heads{4, 16};
  int mlp_hidden = 128;
  int n_steps = 4;
  double initial_noise = 0.4;  // noise level of the first step, in [0, 1]
  RoPEConfig rope{};
  int cache_window = 6;        // frames retained in each layer's KV cache
  double qk_alignment = 0.5;   // W_K = a W_Q + sqrt(1 - a^2) G
  double residual_scale = 1.0; // gain on W_O and W_2; small values keep content
  std::uint64_t seed = 0;

  void validate() const;
};

struct BlockWeights {
  ProjectionWeights qkv;
  Matrix wo;  // width x model_dim
  Matrix w1;  // model_dim x mlp_hidden
  std::vector<float> b1;
  Matrix w2;  // mlp_hidden x model_dim
};

/// Pre-rotation keys and values of one layer, rows aligned with the input.
struct LayerKV {
  Matrix keys;
  Matrix values;
};

/// What one forward call may attend to besides its own tokens.
struct ForwardContext {
  FrameSpan span;
  int rows = 0;
  int cols = 0;
  const RunLengthPlan* plan = nullptr;      // null: tokens are the full grid span
  std::optional<RecoveryConfig> recovery;   // null: direct pruning
  const std::vector<KVCache>* caches = nullptr;  // one per block, or null
};

class ToyDenoiser {
 public:
  explicit ToyDenoiser(ToyDenoiserConfig cfg);

  const ToyDenoiserConfig& config() const { return cfg_; }
  const std::vector<BlockWeights>& blocks() const { return blocks_; }

  /// Runs every block over tokens at `positions` (canonical order, inside
  /// ctx.span). When `record` is given it receives each block's K/V.
  Matrix forward(std::span<const Position> positions, const Matrix& x, const ForwardContext& ctx,
                 std::vector<LayerKV>* record = nullptr) const;

 private:
  ToyDenoiserConfig cfg_;
  std::vector<BlockWeights> blocks_;
};

/// One denoiser application over a whole sequence, no cache. With a plan the
/// sequence holds the kept tokens and `recovery` selects attention recovery
/// (nullopt = direct pruning); without a plan it is the full sequence.
TokenSequence toy_denoiser(const TokenSequence& seq, const ToyDenoiser& model, int rows, int cols,
                           const RunLengthPlan* plan,
                           const std::optional<RecoveryConfig>& recovery);

}  // namespace lipar
