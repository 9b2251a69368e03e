#include "lipar/rope.hpp"

#include <cmath>
#include <string>

#include "lipar/errors.hpp"

namespace lipar {
namespace {

int effective_dims(std::size_t len, const RoPEConfig& cfg) {
  const int dims = cfg.rotated_dims == 0 ? static_cast<int>(len) : cfg.rotated_dims;
  if (dims % 2 != 0) throw ValidationError("rope: rotated span has odd length " + std::to_string(dims));
  if (dims < 0 || static_cast<std::size_t>(dims) > len) {
    throw ValidationError("rope: rotated_dims exceeds vector length");
  }
  return dims;
}

// Axis coordinate driving pair i.
int pair_coordinate(int pair, int pairs, Position pos, RopeMode mode) {
  if (mode == RopeMode::temporal) return pos.t;
  const int spatial = pairs / 3;
  const int temporal = pairs - 2 * spatial;
  if (pair < temporal) return pos.t;
  if (pair < temporal + spatial) return pos.y;
  return pos.x;
}

}  // namespace

double rope_frequency(int pair, int rotated_dims, double base) {
  return std::pow(base, -2.0 * pair / static_cast<double>(rotated_dims));
}

void rope_rotate_inplace(std::span<float> v, Position pos, const RoPEConfig& cfg) {
  const int dims = effective_dims(v.size(), cfg);
  const int pairs = dims / 2;
  for (int i = 0; i < pairs; ++i) {
    const int coord = pair_coordinate(i, pairs, pos, cfg.mode);
    if (coord == 0) continue;
    const double angle = coord * rope_frequency(i, dims, cfg.base);
    const double c = std::cos(angle), s = std::sin(angle);
    const double a = v[2 * i], b = v[2 * i + 1];
    v[2 * i] = static_cast<float>(a * c - b * s);
    v[2 * i + 1] = static_cast<float>(a * s + b * c);
  }
}

std::vector<float> rope_rotate(std::span<const float> v, Position pos, const RoPEConfig& cfg) {
  std::vector<float> out(v.begin(), v.end());
  rope_rotate_inplace(out, pos, cfg);
  return out;
}

void rope_rotate_heads(std::span<float> row, int n_heads, int head_dim, Position pos,
                       const RoPEConfig& cfg) {
  if (static_cast<std::size_t>(n_heads) * head_dim != row.size()) {
    throw ValidationError("rope: packed row length != n_heads * head_dim");
  }
  for (int h = 0; h < n_heads; ++h) {
    rope_rotate_inplace(row.subspan(static_cast<std::size_t>(h) * head_dim, head_dim), pos, cfg);
  }
}

}  // namespace lipar
