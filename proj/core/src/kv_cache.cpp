#include "lipar/kv_cache.hpp"

#include <algorithm>
#include <cstdlib>

namespace lipar {

KVCache::KVCache(int rows, int cols, int width, int window)
    : rows_(rows), cols_(cols), width_(width), window_(window) {
  if (rows < 1 || cols < 1 || width < 1) throw ValidationError("kv cache: extents must be >= 1");
  if (window < 1) throw ValidationError("kv cache: window must be >= 1");
}

void KVCache::append(FrameKV frame) {
  if (!frame.clean) throw ValidationError("kv cache: only clean (zero-noise) tokens may be cached");
  const int locs = rows_ * cols_;
  if (frame.keys.rows() != locs || frame.values.rows() != locs || frame.keys.cols() != width_ ||
      frame.values.cols() != width_) {
    throw DimensionError("kv cache: frame extents do not match cache");
  }
  if (frame.present.empty()) frame.present.assign(static_cast<std::size_t>(locs), 1);
  if (static_cast<int>(frame.present.size()) != locs) {
    throw DimensionError("kv cache: presence mask has the wrong length");
  }
  auto it = std::lower_bound(frames_.begin(), frames_.end(), frame.t,
                             [](const FrameKV& f, int t) { return f.t < t; });
  if (it != frames_.end() && it->t == frame.t) {
    *it = std::move(frame);
  } else {
    frames_.insert(it, std::move(frame));
  }
  while (static_cast<int>(frames_.size()) > window_) frames_.pop_front();
}

std::vector<int> KVCache::frames() const {
  std::vector<int> out;
  out.reserve(frames_.size());
  for (const auto& f : frames_) out.push_back(f.t);
  return out;
}

const FrameKV* KVCache::find(int t) const {
  for (const auto& f : frames_)
    if (f.t == t) return &f;
  return nullptr;
}

std::optional<CacheEntry> KVCache::lookup(int t, int y, int x) const {
  const FrameKV* f = find(t);
  if (!f) return std::nullopt;
  const int loc = y * cols_ + x;
  if (!f->present[static_cast<std::size_t>(loc)]) return std::nullopt;
  return CacheEntry{f->t, f->keys.row(loc), f->values.row(loc)};
}

std::optional<CacheEntry> KVCache::closest(int y, int x, int t) const {
  const int loc = y * cols_ + x;
  const FrameKV* best = nullptr;
  int best_dist = 0;
  for (const auto& f : frames_) {
    if (!f.present[static_cast<std::size_t>(loc)]) continue;
    const int d = std::abs(f.t - t);
    // frames_ ascends in t, so "<=" prefers the later of two equal distances.
    if (!best || d <= best_dist) {
      best = &f;
      best_dist = d;
    }
  }
  if (!best) return std::nullopt;
  return CacheEntry{best->t, best->keys.row(loc), best->values.row(loc)};
}

}  // namespace lipar
