#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "lipar/tensor.hpp"

namespace lipar {

/// Pre-rotation keys and values for one frame, one row per spatial location
/// (row-major over the patch grid). `present` marks locations that carry a
/// token; the rest are holes.
struct FrameKV {
  int t = 0;
  Matrix keys;
  Matrix values;
  std::vector<std::uint8_t> present;
  bool clean = false;  // produced at zero noise level
};

struct CacheEntry {
  int t = 0;
  std::span<const float> key;
  std::span<const float> value;
};

/// Clean key/value store for the most recent `window` frames of one
/// attention layer. Single writer; readers must not overlap an append.
class KVCache {
 public:
  KVCache() = default;
  KVCache(int rows, int cols, int width, int window);

  /// Inserts (or replaces) frame `frame.t` and evicts the oldest frames
  /// beyond the window. Throws ValidationError for non-clean input or
  /// mismatched extents.
  void append(FrameKV frame);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int width() const { return width_; }
  int window() const { return window_; }
  bool empty() const { return frames_.empty(); }

  /// Retained frame indices, oldest first.
  std::vector<int> frames() const;
  const FrameKV* find(int t) const;
  /// Entry at (t, y, x) if frame t is retained and the location is present.
  std::optional<CacheEntry> lookup(int t, int y, int x) const;
  /// Present entry at (y, x) temporally closest to t. Equidistant frames
  /// resolve to the more recent one.
  std::optional<CacheEntry> closest(int y, int x, int t) const;

  const std::deque<FrameKV>& retained() const { return frames_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  int width_ = 0;
  int window_ = 6;
  std::deque<FrameKV> frames_;  // sorted by t
};

}  // namespace lipar
