#pragma once

#include <span>

#include "lipar/rope.hpp"
#include "lipar/tensor.hpp"

namespace lipar {

struct HeadConfig {
  int n_heads = 4;
  int head_dim = 16;
  double scale = 0.0;  // 0 means 1 / sqrt(head_dim)

  int width() const { return n_heads * head_dim; }
  double effective_scale() const;
  void validate() const;
};

/// Reference multi-head softmax attention over already-rotated rows.
///
/// queries: n_q x (n_heads * head_dim), keys/values: n_k x same width.
/// When `causal` is set a query at frame t sees keys with frame <= t.
/// Logits are scaled, max-subtracted per query and head, and accumulated in
/// double. Throws ValidationError if a query has no visible key.
Matrix exact_attention(const Matrix& queries, std::span<const int> query_frames,
                       const Matrix& keys, const Matrix& values,
                       std::span<const int> key_frames, const HeadConfig& heads, bool causal);

}  // namespace lipar
