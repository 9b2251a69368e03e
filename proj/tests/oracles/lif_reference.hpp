#pragma once

// Nested-loop reference for the LIF keep mask. Works on the raw latent grid
// with explicit patch indexing and a direct (non-separable) 3-D Gaussian;
// shares no code with the library beyond the container types.

#include <algorithm>
#include <cmath>
#include <vector>

#include "lipar/tensor.hpp"

namespace oracle {

struct LifParams {
  double tau1 = 0.15;
  double tau2 = 0.3;
  int block = 3;
  int pt = 2, ph = 2, pw = 2;
  int gauss = 3;
  double sigma = 1.0;
  int median = 3;
  int closing = 3;
  int dilation = 3;
  int dilation_iterations = 1;
};

using Vol = std::vector<std::vector<std::vector<double>>>;
using Mask = std::vector<std::vector<std::vector<int>>>;

inline Mask make_mask(int T, int H, int W, int v = 0) {
  return Mask(T, std::vector<std::vector<int>>(H, std::vector<int>(W, v)));
}

inline double patch_distance(const lipar::LatentGrid& g, const LifParams& p, int ta, int tb, int y,
                             int x) {
  const int C = g.dims().channels;
  double s = 0.0;
  for (int dt = 0; dt < p.pt; ++dt)
    for (int dy = 0; dy < p.ph; ++dy)
      for (int dx = 0; dx < p.pw; ++dx)
        for (int c = 0; c < C; ++c) {
          const double a = g.at(ta * p.pt + dt, y * p.ph + dy, x * p.pw + dx, c);
          const double b = g.at(tb * p.pt + dt, y * p.ph + dy, x * p.pw + dx, c);
          s += std::fabs(a - b);
        }
  return s;
}

// Threshold of a Gaussian-smoothed diff stack; zero outside the stack.
inline Mask smoothed_above(const Vol& diff, const LifParams& p, double tau) {
  const int n = static_cast<int>(diff.size());
  const int H = static_cast<int>(diff[0].size()), W = static_cast<int>(diff[0][0].size());
  const int r = p.gauss / 2;
  std::vector<double> w(p.gauss);
  double ws = 0.0;
  for (int i = -r; i <= r; ++i) ws += w[i + r] = std::exp(-(i * i) / (2.0 * p.sigma * p.sigma));
  for (auto& v : w) v /= ws;
  Mask out = make_mask(n, H, W);
  for (int t = 0; t < n; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int a = -r; a <= r; ++a)
          for (int b = -r; b <= r; ++b)
            for (int c = -r; c <= r; ++c) {
              const int tt = t + a, yy = y + b, xx = x + c;
              if (tt < 0 || tt >= n || yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
              s += w[a + r] * w[b + r] * w[c + r] * diff[tt][yy][xx];
            }
        out[t][y][x] = s > tau ? 1 : 0;
      }
  return out;
}

inline int clampi(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

inline Mask median_filter(const Mask& m, int e) {
  const int T = static_cast<int>(m.size()), H = static_cast<int>(m[0].size()),
            W = static_cast<int>(m[0][0].size());
  const int r = e / 2;
  Mask out = make_mask(T, H, W);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        std::vector<int> v;
        for (int a = -r; a <= r; ++a)
          for (int b = -r; b <= r; ++b)
            for (int c = -r; c <= r; ++c)
              v.push_back(m[clampi(t + a, T)][clampi(y + b, H)][clampi(x + c, W)]);
        std::sort(v.begin(), v.end());
        out[t][y][x] = v[v.size() / 2];
      }
  return out;
}

inline Mask morph_frame(const Mask& m, int e, bool dilate) {
  const int T = static_cast<int>(m.size()), H = static_cast<int>(m[0].size()),
            W = static_cast<int>(m[0][0].size());
  const int r = e / 2;
  Mask out = make_mask(T, H, W);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        int best = dilate ? 0 : 1;
        for (int b = -r; b <= r; ++b)
          for (int c = -r; c <= r; ++c) {
            const int v = m[t][clampi(y + b, H)][clampi(x + c, W)];
            best = dilate ? std::max(best, v) : std::min(best, v);
          }
        out[t][y][x] = best;
      }
  return out;
}

inline Mask dilate_volume(Mask m, int e, int iterations) {
  const int T = static_cast<int>(m.size()), H = static_cast<int>(m[0].size()),
            W = static_cast<int>(m[0][0].size());
  const int r = e / 2;
  for (int it = 0; it < iterations; ++it) {
    Mask out = make_mask(T, H, W);
    for (int t = 0; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          for (int a = -r; a <= r; ++a)
            for (int b = -r; b <= r; ++b)
              for (int c = -r; c <= r; ++c)
                out[t][y][x] |= m[clampi(t + a, T)][clampi(y + b, H)][clampi(x + c, W)];
    m = out;
  }
  return m;
}

inline int offset_k(int t, int S) { return t % S == 0 ? 1 : t % S; }

/// Keep mask over patch frames, indexed [t][y][x].
inline Mask lif_reference(const lipar::LatentGrid& g, const LifParams& p) {
  const int T = g.dims().frames / p.pt, H = g.dims().rows / p.ph, W = g.dims().cols / p.pw;
  Mask keep = make_mask(T, H, W);
  keep[0] = std::vector<std::vector<int>>(H, std::vector<int>(W, 1));

  if (T > 1) {
    Vol d(T - 1, std::vector<std::vector<double>>(H, std::vector<double>(W)));
    for (int t = 1; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) d[t - 1][y][x] = patch_distance(g, p, t, t - 1, y, x);
    const Mask s = smoothed_above(d, p, p.tau1);
    for (int t = 1; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) keep[t][y][x] |= s[t - 1][y][x];
  }

  int first = T;
  for (int t = 0; t < T; ++t)
    if (t > offset_k(t, p.block)) {
      first = t;
      break;
    }
  for (int t = 0; t < first; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) keep[t][y][x] = 1;
  if (first < T) {
    Vol d(T - first, std::vector<std::vector<double>>(H, std::vector<double>(W)));
    for (int t = first; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          d[t - first][y][x] = patch_distance(g, p, t, t - offset_k(t, p.block), y, x);
    const Mask s = smoothed_above(d, p, p.tau2);
    for (int t = first; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) keep[t][y][x] |= s[t - first][y][x];
  }

  Mask m = median_filter(keep, p.median);
  m = morph_frame(morph_frame(m, p.closing, true), p.closing, false);
  m = dilate_volume(m, p.dilation, p.dilation_iterations);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) m[0][y][x] = 1;
  return m;
}

}  // namespace oracle
