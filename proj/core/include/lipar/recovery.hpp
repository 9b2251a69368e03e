#pragma once

// Attention recovery: approximate full-sequence causal attention from a
// pruned sequence by re-materializing keys/values at the positions the
// pruned tokens would have occupied.
//
// A kept token at frame j that stands for c_j consecutive positions
// j .. j + c_j - 1 contributes, under degree m, entries at the m most recent
// of those positions. Each entry's key is rotated to its own position; its
// value is copied unrotated. With noise-aware duplication the stand-in for a
// pruned position comes from the temporally closest clean token in the KV
// cache instead of the (noisy) kept token.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lipar/attention.hpp"
#include "lipar/kv_cache.hpp"
#include "lipar/rope.hpp"
#include "lipar/tensor.hpp"

namespace lipar {

/// One kept token and the run of positions it represents.
struct Run {
  int kept_t = 0;
  int count = 1;  // 1 + length of the pruned run that follows

  bool operator==(const Run&) const = default;
};

/// Per-location run-length encoding of a keep mask along time. For every
/// location the runs partition [0, frames) and their counts sum to frames.
class RunLengthPlan {
 public:
  RunLengthPlan() = default;
  RunLengthPlan(int frames, int rows, int cols, std::vector<std::vector<Run>> runs);

  int frames() const { return frames_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const Run> runs(int y, int x) const {
    return runs_[static_cast<std::size_t>(y) * cols_ + x];
  }
  /// Run whose covered range contains frame t at (y, x).
  const Run& covering(int y, int x, int t) const;
  std::size_t kept_count() const;

 private:
  int frames_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::vector<Run>> runs_;
};

/// Throws ValidationError unless frame 0 of the mask is all-True.
RunLengthPlan build_plan(const KeepMaskSequence& mask);

struct RecoveryConfig {
  std::optional<int> degree;  // m; nullopt materializes every covered position
  bool noise_aware = true;

  void validate() const;
  int materialized(int covered) const {
    return degree ? std::min(*degree, covered) : covered;
  }
};

enum class KeyOrigin : std::uint8_t {
  kept,             // the token itself, at its own position
  cached,           // clean cache context from frames before the active span
  duplicate_self,   // copy of the kept token (naive duplication)
  duplicate_clean,  // copy of a clean cached token (noise-aware duplication)
};

/// One attention key/value entry after expansion. `key` is already rotated
/// to `pos`; `value` is never rotated.
struct ExpandedEntry {
  Position pos;
  int source_t = 0;
  KeyOrigin origin = KeyOrigin::kept;
  std::vector<float> key;
  std::vector<float> value;
};

/// Frame range [begin, end) being processed in the current forward pass.
struct FrameSpan {
  int begin = 0;
  int end = 0;
};

/// Pre-rotation key/value rows of one kept token at a fixed location.
struct LocationToken {
  int t = 0;
  std::span<const float> key;
  std::span<const float> value;
};

/// Expands the kept tokens of location (y, x) inside `span`. `kept` lists
/// the kept tokens of that location inside the span, ascending in t.
/// `horizon` is the latest frame the consuming queries can see (default:
/// span.end - 1); each run contributes its m most recent covered positions
/// at or before it. Throws CacheMissError when a duplicate needs a cache
/// entry that is not there, ValidationError when `kept` disagrees with the
/// plan.
std::vector<ExpandedEntry> expand_duplicates(int y, int x, std::span<const LocationToken> kept,
                                             const RunLengthPlan& plan, const KVCache* cache,
                                             const RecoveryConfig& cfg, const RoPEConfig& rope,
                                             const HeadConfig& heads, FrameSpan span,
                                             std::optional<int> horizon = std::nullopt);

/// Keys and values ready for exact_attention, in (t, y, x) order.
struct KeySet {
  Matrix keys;
  Matrix values;
  std::vector<int> frames;
  std::vector<Position> positions;
  std::vector<int> source_frames;
  std::vector<KeyOrigin> origins;
};

/// Tokens of the active span: canonical (t, y, x) order, pre-rotation K/V
/// rows aligned with `positions`.
struct ActiveTokens {
  std::span<const Position> positions;
  const Matrix* keys = nullptr;
  const Matrix* values = nullptr;
};

/// Builds the key set seen by the active queries:
///  - clean cache frames older than span.begin (context),
///  - the active tokens, and
///  - when `recovery` is set, duplicates for pruned positions in the span.
/// Without a plan or without recovery only the active tokens (plus cache
/// context) are used, which is direct pruning.
KeySet assemble_keys(const ActiveTokens& active, FrameSpan span, int rows, int cols,
                     const RunLengthPlan* plan, const KVCache* cache,
                     const std::optional<RecoveryConfig>& recovery, const RoPEConfig& rope,
                     const HeadConfig& heads, std::optional<int> horizon = std::nullopt);

/// Causal attention of the active tokens (queries already rotated, rows
/// aligned with active.positions) over assemble_keys. With a finite degree
/// the key set is rebuilt per query frame t with horizon t, so a query
/// inside a run sees the m most recent positions it can see; with m = ALL
/// one key set serves every query. `keys_out` receives the key set seen by
/// the latest frame of the span.
Matrix recovered_causal_attention(const Matrix& rotated_queries, const ActiveTokens& active,
                                  FrameSpan span, int rows, int cols, const RunLengthPlan* plan,
                                  const KVCache* cache,
                                  const std::optional<RecoveryConfig>& recovery,
                                  const RoPEConfig& rope, const HeadConfig& heads,
                                  KeySet* keys_out = nullptr);

/// Projection weights, each model_dim x (n_heads * head_dim).
struct ProjectionWeights {
  Matrix wq;
  Matrix wk;
  Matrix wv;
};

/// Tokens with positions and model-dim embeddings (one row per token).
struct TokenSequence {
  std::vector<Position> positions;
  Matrix embeddings;

  std::size_t size() const { return positions.size(); }
};

/// Throws ValidationError unless positions are unique and in (t, y, x) order.
void require_canonical_order(std::span<const Position> positions, const char* who);

/// Unpruned oracle: causal attention of every token over every token.
Matrix full_attention(const TokenSequence& seq, const ProjectionWeights& w,
                      const HeadConfig& heads, const RoPEConfig& rope);

/// Attention of the kept tokens over the expanded key set. Output has one
/// row per kept token; queries are never duplicated.
Matrix recovered_attention(const TokenSequence& kept, const RunLengthPlan& plan,
                           const KVCache* cache, const RecoveryConfig& cfg,
                           const ProjectionWeights& w, const HeadConfig& heads,
                           const RoPEConfig& rope);

/// Same, but with the key set exposed for accounting and delta measurement.
struct RecoveredAttention {
  Matrix output;
  KeySet keys;
};
RecoveredAttention recovered_attention_detailed(const TokenSequence& kept,
                                                const RunLengthPlan& plan, const KVCache* cache,
                                                const RecoveryConfig& cfg,
                                                const ProjectionWeights& w,
                                                const HeadConfig& heads, const RoPEConfig& rope);

/// Cache holding pre-rotation clean K/V for the given tokens, one cache
/// frame per distinct t. Locations absent from `clean` are holes.
KVCache cache_from_tokens(const TokenSequence& clean, const ProjectionWeights& w, int rows,
                          int cols, int window);

/// Partial versus full exponential sums for one kept key standing for
/// `count` positions. Exponents are q . R(l) k for l in [0, count), times
/// `scale`; `partial` sums the `degree` most recent l, `top` the `degree`
/// largest exponents. All three are reported relative to exp(shift).
struct PartialSum {
  double partial = 0.0;
  double full = 0.0;
  double top = 0.0;
  double shift = 0.0;
};
PartialSum partial_sum_bound_check(std::span<const float> query, std::span<const float> key,
                                   int count, int degree, const RoPEConfig& rope,
                                   double scale = 1.0);

}  // namespace lipar
