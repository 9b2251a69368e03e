#include "lipar/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lipar {

RunLengthPlan::RunLengthPlan(int frames, int rows, int cols, std::vector<std::vector<Run>> runs)
    : frames_(frames), rows_(rows), cols_(cols), runs_(std::move(runs)) {
  if (runs_.size() != static_cast<std::size_t>(rows) * cols) {
    throw DimensionError("run-length plan: one run list per location required");
  }
  for (const auto& loc : runs_) {
    int next = 0;
    for (const auto& r : loc) {
      if (r.kept_t != next || r.count < 1) {
        throw ValidationError("run-length plan: runs must partition [0, frames)");
      }
      next += r.count;
    }
    if (next != frames) throw ValidationError("run-length plan: counts must sum to frames");
  }
}

const Run& RunLengthPlan::covering(int y, int x, int t) const {
  auto rs = runs(y, x);
  auto it = std::upper_bound(rs.begin(), rs.end(), t,
                             [](int tt, const Run& r) { return tt < r.kept_t; });
  return *(it - 1);
}

std::size_t RunLengthPlan::kept_count() const {
  std::size_t n = 0;
  for (const auto& loc : runs_) n += loc.size();
  return n;
}

RunLengthPlan build_plan(const KeepMaskSequence& mask) {
  require_first_frame_kept(mask, "build_plan");
  std::vector<std::vector<Run>> runs(static_cast<std::size_t>(mask.rows()) * mask.cols());
  for (int y = 0; y < mask.rows(); ++y)
    for (int x = 0; x < mask.cols(); ++x) {
      auto& loc = runs[static_cast<std::size_t>(y) * mask.cols() + x];
      for (int t = 0; t < mask.frames(); ++t) {
        if (mask.at(t, y, x)) {
          loc.push_back(Run{t, 1});
        } else {
          ++loc.back().count;
        }
      }
    }
  return RunLengthPlan(mask.frames(), mask.rows(), mask.cols(), std::move(runs));
}

void RecoveryConfig::validate() const {
  if (degree && *degree < 1) throw ValidationError("recovery config: degree m must be >= 1");
}

namespace {

ExpandedEntry make_entry(Position pos, int source_t, KeyOrigin origin,
                         std::span<const float> key, std::span<const float> value,
                         const RoPEConfig& rope, const HeadConfig& heads) {
  ExpandedEntry e{pos, source_t, origin, {key.begin(), key.end()}, {value.begin(), value.end()}};
  rope_rotate_heads(e.key, heads.n_heads, heads.head_dim, pos, rope);
  return e;
}

std::string where(int t, int y, int x) {
  return "(" + std::to_string(t) + ", " + std::to_string(y) + ", " + std::to_string(x) + ")";
}

}  // namespace

std::vector<ExpandedEntry> expand_duplicates(int y, int x, std::span<const LocationToken> kept,
                                             const RunLengthPlan& plan, const KVCache* cache,
                                             const RecoveryConfig& cfg, const RoPEConfig& rope,
                                             const HeadConfig& heads, FrameSpan span,
                                             std::optional<int> horizon) {
  cfg.validate();
  const int last = horizon ? std::min(*horizon + 1, span.end) : span.end;
  std::vector<ExpandedEntry> out;
  std::size_t next_kept = 0;
  for (const Run& run : plan.runs(y, x)) {
    const int lo = std::max(run.kept_t, span.begin);
    const int hi = std::min(run.kept_t + run.count, last);
    if (lo >= std::min(run.kept_t + run.count, span.end)) continue;

    const bool kept_in_span = run.kept_t >= span.begin && run.kept_t < span.end;
    const LocationToken* self = nullptr;
    if (kept_in_span) {
      if (next_kept >= kept.size() || kept[next_kept].t != run.kept_t) {
        throw ValidationError("expand_duplicates: plan keeps " + where(run.kept_t, y, x) +
                              " but no active token is there");
      }
      self = &kept[next_kept++];
    }

    if (lo >= hi) continue;
    const int n = cfg.materialized(hi - lo);
    for (int p = hi - n; p < hi; ++p) {
      const Position pos{p, y, x};
      if (p == run.kept_t) {
        out.push_back(make_entry(pos, p, KeyOrigin::kept, self->key, self->value, rope, heads));
        continue;
      }
      if (!cfg.noise_aware && self) {
        out.push_back(
            make_entry(pos, run.kept_t, KeyOrigin::duplicate_self, self->key, self->value, rope, heads));
        continue;
      }
      // Noise-aware, or a naive copy whose kept token lives before the span:
      // either way the stand-in comes from the clean cache.
      std::optional<CacheEntry> hit;
      if (cache) hit = cfg.noise_aware ? cache->closest(y, x, p) : cache->lookup(run.kept_t, y, x);
      if (!hit && cache && !cfg.noise_aware) hit = cache->closest(y, x, p);
      if (!hit) {
        throw CacheMissError("no clean cache token for duplicated position " + where(p, y, x));
      }
      out.push_back(make_entry(pos, hit->t,
                               cfg.noise_aware ? KeyOrigin::duplicate_clean : KeyOrigin::duplicate_self,
                               hit->key, hit->value, rope, heads));
    }
  }
  if (next_kept != kept.size()) {
    throw ValidationError("expand_duplicates: active token at " +
                          where(kept[next_kept].t, y, x) + " is pruned in the plan");
  }
  return out;
}

void require_canonical_order(std::span<const Position> positions, const char* who) {
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (!(positions[i - 1] < positions[i])) {
      throw ValidationError(std::string(who) +
                            ": token positions must be unique and in (t, y, x) order");
    }
  }
}

KeySet assemble_keys(const ActiveTokens& active, FrameSpan span, int rows, int cols,
                     const RunLengthPlan* plan, const KVCache* cache,
                     const std::optional<RecoveryConfig>& recovery, const RoPEConfig& rope,
                     const HeadConfig& heads, std::optional<int> horizon) {
  const int width = heads.width();
  if (!active.keys || !active.values || active.keys->rows() != static_cast<int>(active.positions.size()) ||
      active.values->rows() != active.keys->rows() || active.keys->cols() != width ||
      active.values->cols() != width) {
    throw DimensionError("assemble_keys: active K/V rows do not match positions or head width");
  }
  require_canonical_order(active.positions, "assemble_keys");
  for (const auto& p : active.positions) {
    if (p.t < span.begin || p.t >= span.end || p.y < 0 || p.y >= rows || p.x < 0 || p.x >= cols) {
      throw ValidationError("assemble_keys: active token " + where(p.t, p.y, p.x) +
                            " lies outside the span or grid");
    }
  }
  if (plan && (plan->rows() != rows || plan->cols() != cols || plan->frames() < span.end)) {
    throw DimensionError("assemble_keys: plan extents do not cover the span");
  }

  std::vector<ExpandedEntry> entries;
  if (cache) {
    for (const auto& f : cache->retained()) {
      if (f.t >= span.begin) continue;
      for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) {
          const int loc = y * cols + x;
          if (!f.present[static_cast<std::size_t>(loc)]) continue;
          entries.push_back(make_entry({f.t, y, x}, f.t, KeyOrigin::cached, f.keys.row(loc),
                                       f.values.row(loc), rope, heads));
        }
    }
  }

  if (plan && recovery) {
    // Group active tokens per location, preserving ascending t.
    std::vector<std::vector<LocationToken>> per_loc(static_cast<std::size_t>(rows) * cols);
    for (std::size_t i = 0; i < active.positions.size(); ++i) {
      const auto& p = active.positions[i];
      per_loc[static_cast<std::size_t>(p.y) * cols + p.x].push_back(
          LocationToken{p.t, active.keys->row(static_cast<int>(i)),
                        active.values->row(static_cast<int>(i))});
    }
    for (int y = 0; y < rows; ++y)
      for (int x = 0; x < cols; ++x) {
        auto loc = expand_duplicates(y, x, per_loc[static_cast<std::size_t>(y) * cols + x], *plan,
                                     cache, *recovery, rope, heads, span, horizon);
        std::move(loc.begin(), loc.end(), std::back_inserter(entries));
      }
  } else {
    for (std::size_t i = 0; i < active.positions.size(); ++i) {
      const auto& p = active.positions[i];
      if (plan && plan->covering(p.y, p.x, p.t).kept_t != p.t) {
        throw ValidationError("assemble_keys: active token " + where(p.t, p.y, p.x) +
                              " is pruned in the plan");
      }
      entries.push_back(make_entry(p, p.t, KeyOrigin::kept, active.keys->row(static_cast<int>(i)),
                                   active.values->row(static_cast<int>(i)), rope, heads));
    }
  }

  std::stable_sort(entries.begin(), entries.end(),
                   [](const ExpandedEntry& a, const ExpandedEntry& b) { return a.pos < b.pos; });

  KeySet ks;
  const int n = static_cast<int>(entries.size());
  ks.keys = Matrix(n, width);
  ks.values = Matrix(n, width);
  ks.frames.reserve(entries.size());
  ks.positions.reserve(entries.size());
  ks.source_frames.reserve(entries.size());
  ks.origins.reserve(entries.size());
  for (int i = 0; i < n; ++i) {
    auto& e = entries[static_cast<std::size_t>(i)];
    std::copy(e.key.begin(), e.key.end(), ks.keys.row(i).begin());
    std::copy(e.value.begin(), e.value.end(), ks.values.row(i).begin());
    ks.frames.push_back(e.pos.t);
    ks.positions.push_back(e.pos);
    ks.source_frames.push_back(e.source_t);
    ks.origins.push_back(e.origin);
  }
  return ks;
}

Matrix recovered_causal_attention(const Matrix& rotated_queries, const ActiveTokens& active,
                                  FrameSpan span, int rows, int cols, const RunLengthPlan* plan,
                                  const KVCache* cache,
                                  const std::optional<RecoveryConfig>& recovery,
                                  const RoPEConfig& rope, const HeadConfig& heads,
                                  KeySet* keys_out) {
  const auto& pos = active.positions;
  if (rotated_queries.rows() != static_cast<int>(pos.size())) {
    throw DimensionError("recovered attention: query rows != active positions");
  }
  std::vector<int> qframes;
  qframes.reserve(pos.size());
  for (const auto& p : pos) qframes.push_back(p.t);

  const bool per_frame = plan && recovery && recovery->degree;
  if (!per_frame) {
    KeySet ks = assemble_keys(active, span, rows, cols, plan, cache, recovery, rope, heads);
    Matrix out = exact_attention(rotated_queries, qframes, ks.keys, ks.values, ks.frames, heads, true);
    if (keys_out) *keys_out = std::move(ks);
    return out;
  }

  // Canonical order keeps each query frame contiguous.
  Matrix out(rotated_queries.rows(), rotated_queries.cols());
  std::size_t begin = 0;
  while (begin < pos.size()) {
    const int t = pos[begin].t;
    std::size_t end = begin;
    while (end < pos.size() && pos[end].t == t) ++end;
    KeySet ks = assemble_keys(active, span, rows, cols, plan, cache, recovery, rope, heads, t);
    const int n = static_cast<int>(end - begin);
    Matrix q(n, rotated_queries.cols());
    for (int i = 0; i < n; ++i) {
      auto src = rotated_queries.row(static_cast<int>(begin) + i);
      std::copy(src.begin(), src.end(), q.row(i).begin());
    }
    const std::vector<int> f(static_cast<std::size_t>(n), t);
    const Matrix o = exact_attention(q, f, ks.keys, ks.values, ks.frames, heads, true);
    for (int i = 0; i < n; ++i) {
      auto src = o.row(i);
      std::copy(src.begin(), src.end(), out.row(static_cast<int>(begin) + i).begin());
    }
    begin = end;
  }
  if (keys_out) {
    *keys_out = assemble_keys(active, span, rows, cols, plan, cache, recovery, rope, heads);
  }
  return out;
}

namespace {

struct Projected {
  Matrix q, k, v;
};

Projected project(const TokenSequence& seq, const ProjectionWeights& w) {
  if (seq.embeddings.rows() != static_cast<int>(seq.positions.size())) {
    throw DimensionError("token sequence: embedding rows != position count");
  }
  return {multiply(seq.embeddings, w.wq), multiply(seq.embeddings, w.wk),
          multiply(seq.embeddings, w.wv)};
}

void rotate_rows(Matrix& m, std::span<const Position> pos, const HeadConfig& heads,
                 const RoPEConfig& rope) {
  for (int i = 0; i < m.rows(); ++i) {
    rope_rotate_heads(m.row(i), heads.n_heads, heads.head_dim, pos[static_cast<std::size_t>(i)], rope);
  }
}

std::vector<int> frames_of(std::span<const Position> pos) {
  std::vector<int> f;
  f.reserve(pos.size());
  for (const auto& p : pos) f.push_back(p.t);
  return f;
}

}  // namespace

Matrix full_attention(const TokenSequence& seq, const ProjectionWeights& w,
                      const HeadConfig& heads, const RoPEConfig& rope) {
  Projected p = project(seq, w);
  rotate_rows(p.q, seq.positions, heads, rope);
  rotate_rows(p.k, seq.positions, heads, rope);
  const auto frames = frames_of(seq.positions);
  return exact_attention(p.q, frames, p.k, p.v, frames, heads, true);
}

RecoveredAttention recovered_attention_detailed(const TokenSequence& kept,
                                                const RunLengthPlan& plan, const KVCache* cache,
                                                const RecoveryConfig& cfg,
                                                const ProjectionWeights& w,
                                                const HeadConfig& heads, const RoPEConfig& rope) {
  Projected p = project(kept, w);
  ActiveTokens active{kept.positions, &p.k, &p.v};
  rotate_rows(p.q, kept.positions, heads, rope);
  KeySet ks;
  Matrix out = recovered_causal_attention(p.q, active, FrameSpan{0, plan.frames()}, plan.rows(),
                                          plan.cols(), &plan, cache, cfg, rope, heads, &ks);
  return {std::move(out), std::move(ks)};
}

Matrix recovered_attention(const TokenSequence& kept, const RunLengthPlan& plan,
                           const KVCache* cache, const RecoveryConfig& cfg,
                           const ProjectionWeights& w, const HeadConfig& heads,
                           const RoPEConfig& rope) {
  return recovered_attention_detailed(kept, plan, cache, cfg, w, heads, rope).output;
}

KVCache cache_from_tokens(const TokenSequence& clean, const ProjectionWeights& w, int rows,
                          int cols, int window) {
  Projected p = project(clean, w);
  const int width = p.k.cols();
  KVCache cache(rows, cols, width, window);
  std::vector<int> frames = frames_of(clean.positions);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  for (int t : frames) {
    FrameKV f{t, Matrix(rows * cols, width), Matrix(rows * cols, width),
              std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * cols, 0), true};
    for (std::size_t i = 0; i < clean.positions.size(); ++i) {
      const auto& pos = clean.positions[i];
      if (pos.t != t) continue;
      const int loc = pos.y * cols + pos.x;
      auto kr = p.k.row(static_cast<int>(i));
      auto vr = p.v.row(static_cast<int>(i));
      std::copy(kr.begin(), kr.end(), f.keys.row(loc).begin());
      std::copy(vr.begin(), vr.end(), f.values.row(loc).begin());
      f.present[static_cast<std::size_t>(loc)] = 1;
    }
    cache.append(std::move(f));
  }
  return cache;
}

PartialSum partial_sum_bound_check(std::span<const float> query, std::span<const float> key,
                                   int count, int degree, const RoPEConfig& rope, double scale) {
  if (query.size() != key.size()) throw DimensionError("partial sum: q and k lengths differ");
  if (count < 1 || degree < 1 || degree > count) {
    throw ValidationError("partial sum: need 1 <= m <= c_j");
  }
  std::vector<double> expo(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) {
    const auto rk = rope_rotate(key, Position{l, 0, 0}, rope);
    double dot = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) dot += static_cast<double>(query[d]) * rk[d];
    expo[static_cast<std::size_t>(l)] = dot * scale;
  }
  PartialSum ps;
  ps.shift = *std::max_element(expo.begin(), expo.end());
  // Full and partial share accumulation order, so partial <= full holds
  // exactly in floating point (addition of non-negatives is monotone).
  for (int l = 0; l < count; ++l) {
    ps.full += std::exp(expo[static_cast<std::size_t>(l)] - ps.shift);
  }
  for (int l = count - degree; l < count; ++l) {
    ps.partial += std::exp(expo[static_cast<std::size_t>(l)] - ps.shift);
  }
  std::vector<double> sorted = expo;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (int i = 0; i < degree; ++i) ps.top += std::exp(sorted[static_cast<std::size_t>(i)] - ps.shift);
  return ps;
}

}  // namespace lipar
