#include "lipar/filters.hpp"

#include <algorithm>
#include <cmath>

namespace lipar {
namespace {

void require_odd(int extent, const char* what) {
  if (extent < 1 || extent % 2 == 0) {
    throw ValidationError(std::string(what) + ": kernel extent must be odd and >= 1");
  }
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

std::vector<double> gaussian_taps(int extent, double sigma) {
  require_odd(extent, "gaussian");
  if (!(sigma > 0.0)) throw ValidationError("gaussian: sigma must be positive");
  const int r = extent / 2;
  std::vector<double> taps(extent);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    taps[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[i + r];
  }
  for (auto& w : taps) w /= sum;
  return taps;
}

DeltaField gaussian_blur3d(const DeltaField& field, int extent, double sigma) {
  const auto taps = gaussian_taps(extent, sigma);
  const int r = extent / 2;
  const int T = field.frames(), H = field.rows(), W = field.cols();

  DeltaField a(T, H, W), b(T, H, W);
  // x axis
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int xx = x + k;
          if (xx >= 0 && xx < W) s += taps[k + r] * field.at(t, y, xx);
        }
        a.at(t, y, x) = s;
      }
  // y axis
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int yy = y + k;
          if (yy >= 0 && yy < H) s += taps[k + r] * a.at(t, yy, x);
        }
        b.at(t, y, x) = s;
      }
  // t axis
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int tt = t + k;
          if (tt >= 0 && tt < T) s += taps[k + r] * b.at(tt, y, x);
        }
        a.at(t, y, x) = s;
      }
  return a;
}

BoolField median3d(const BoolField& mask, int extent) {
  require_odd(extent, "median3d");
  const int r = extent / 2;
  const int votes = extent * extent * extent;
  const int T = mask.frames(), H = mask.rows(), W = mask.cols();
  BoolField out(T, H, W);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        int on = 0;
        for (int dt = -r; dt <= r; ++dt)
          for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx)
              on += mask.at(clamp_index(t + dt, T), clamp_index(y + dy, H), clamp_index(x + dx, W));
        out.at(t, y, x) = 2 * on > votes ? 1 : 0;
      }
  return out;
}

namespace {

// Square 2-D min/max filter per frame.
BoolField morph2d(const BoolField& mask, int extent, bool dilate) {
  require_odd(extent, dilate ? "dilate2d" : "erode2d");
  const int r = extent / 2;
  const int T = mask.frames(), H = mask.rows(), W = mask.cols();
  BoolField out(T, H, W);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        bool v = !dilate;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const bool s = mask.at(t, clamp_index(y + dy, H), clamp_index(x + dx, W)) != 0;
            v = dilate ? (v || s) : (v && s);
          }
        out.at(t, y, x) = v ? 1 : 0;
      }
  return out;
}

}  // namespace

BoolField dilate2d(const BoolField& mask, int extent) { return morph2d(mask, extent, true); }
BoolField erode2d(const BoolField& mask, int extent) { return morph2d(mask, extent, false); }
BoolField close2d(const BoolField& mask, int extent) {
  return erode2d(dilate2d(mask, extent), extent);
}

BoolField dilate3d(const BoolField& mask, int extent, int iterations) {
  require_odd(extent, "dilate3d");
  if (iterations < 0) throw ValidationError("dilate3d: iterations must be >= 0");
  const int r = extent / 2;
  BoolField cur = mask;
  for (int it = 0; it < iterations; ++it) {
    const int T = cur.frames(), H = cur.rows(), W = cur.cols();
    BoolField next(T, H, W);
    for (int t = 0; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          bool v = false;
          for (int dt = -r; dt <= r && !v; ++dt)
            for (int dy = -r; dy <= r && !v; ++dy)
              for (int dx = -r; dx <= r && !v; ++dx)
                v = cur.at(clamp_index(t + dt, T), clamp_index(y + dy, H), clamp_index(x + dx, W)) != 0;
          next.at(t, y, x) = v ? 1 : 0;
        }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace lipar
