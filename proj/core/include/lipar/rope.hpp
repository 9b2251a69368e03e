#pragma once

#include <span>
#include <vector>

namespace lipar {

/// Token position in the latent video: frame, row, col (patch units).
struct Position {
  int t = 0;
  int y = 0;
  int x = 0;

  auto operator<=>(const Position&) const = default;
};

enum class RopeMode {
  temporal,    // only the frame index rotates; spatial axes unrotated
  factorized,  // rotated pairs split into t / y / x groups
};

struct RoPEConfig {
  double base = 10000.0;
  int rotated_dims = 0;  // per head; 0 means "all of head_dim"
  RopeMode mode = RopeMode::temporal;
};

/// Angular frequency of rotated pair i: base^(-2i / rotated_dims).
double rope_frequency(int pair, int rotated_dims, double base);

/// Rotates pairs (2i, 2i + 1) of `v` inside the first rotated_dims entries.
/// Throws ValidationError if rotated_dims is odd or exceeds v.size().
std::vector<float> rope_rotate(std::span<const float> v, Position pos, const RoPEConfig& cfg);
void rope_rotate_inplace(std::span<float> v, Position pos, const RoPEConfig& cfg);

/// Applies rope to every head slice of a packed (n_heads * head_dim) row.
void rope_rotate_heads(std::span<float> row, int n_heads, int head_dim, Position pos,
                       const RoPEConfig& cfg);

}  // namespace lipar
