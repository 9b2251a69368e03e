#include "lipar/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "lipar/parallel.hpp"
#include "lipar/random.hpp"
#include "lipar/stats.hpp"

namespace lipar {
namespace {

using Clock = std::chrono::steady_clock;

// Restores the worker count on scope exit.
class SingleThreadScope {
 public:
  SingleThreadScope() : saved_(worker_threads()) { set_worker_threads(1); }
  ~SingleThreadScope() { set_worker_threads(saved_); }
  SingleThreadScope(const SingleThreadScope&) = delete;
  SingleThreadScope& operator=(const SingleThreadScope&) = delete;

 private:
  int saved_;
};

}  // namespace

void LatencySweepConfig::validate() const {
  denoiser.validate();
  recovery.validate();
  if (frames < 1 || rows < 1 || cols < 1) throw ValidationError("latency: grid extents must be >= 1");
  if (fractions.size() < 5) throw ValidationError("latency: need at least 5 kept fractions");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ValidationError("latency: fractions must lie in (0, 1]");
  }
  if (runs < 1 || warmup < 0) throw ValidationError("latency: runs must be >= 1, warmup >= 0");
  if (recovery.noise_aware) {
    throw ValidationError("latency: the sweep has no clean cache; use naive duplication");
  }
}

KeepMaskSequence synthetic_mask(int frames, int rows, int cols, double fraction,
                                std::uint64_t seed) {
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  const std::size_t total = plane * frames;
  const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  if (want < plane || want > total) {
    throw ValidationError("synthetic_mask: fraction " + std::to_string(fraction) +
                          " cannot keep frame 0 (" + std::to_string(plane) + " of " +
                          std::to_string(total) + " tokens)");
  }
  std::vector<std::size_t> rest(total - plane);
  std::iota(rest.begin(), rest.end(), plane);
  Rng rng(derive_seed(seed, {0x3A5C}));
  std::shuffle(rest.begin(), rest.end(), rng);
  KeepMaskSequence mask(frames, rows, cols, std::uint8_t{0});
  auto bits = mask.data();
  std::fill_n(bits.begin(), plane, std::uint8_t{1});
  for (std::size_t i = 0; i < want - plane; ++i) bits[rest[i]] = 1;
  return mask;
}

LatencyCurve latency_sweep(const LatencySweepConfig& cfg) {
  cfg.validate();
  SingleThreadScope single;
  const ToyDenoiser model(cfg.denoiser);
  const int dm = cfg.denoiser.model_dim;

  LatencyCurve curve;
  for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
    const double frac = cfg.fractions[fi];
    const KeepMaskSequence mask = synthetic_mask(cfg.frames, cfg.rows, cfg.cols, frac,
                                                 derive_seed(cfg.seed, {static_cast<int>(fi)}));
    const RunLengthPlan plan = build_plan(mask);
    std::vector<Position> pos;
    for (int t = 0; t < cfg.frames; ++t)
      for (int y = 0; y < cfg.rows; ++y)
        for (int x = 0; x < cfg.cols; ++x)
          if (mask.at(t, y, x)) pos.push_back({t, y, x});

    Rng rng(derive_seed(cfg.seed, {0x70C, static_cast<int>(fi)}));
    std::normal_distribution<double> nd;
    Matrix tokens(static_cast<int>(pos.size()), dm);
    for (auto& v : tokens.data()) v = static_cast<float>(nd(rng));

    ForwardContext ctx;
    ctx.span = FrameSpan{0, cfg.frames};
    ctx.rows = cfg.rows;
    ctx.cols = cfg.cols;
    ctx.plan = &plan;
    ctx.recovery = cfg.recovery;

    if (fi == 0)
      for (int w = 0; w < cfg.warmup; ++w) model.forward(pos, tokens, ctx);
    std::vector<double> ms;
    for (int r = 0; r < cfg.runs; ++r) {
      const auto t0 = Clock::now();
      const Matrix out = model.forward(pos, tokens, ctx);
      const auto t1 = Clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      if (out.rows() != tokens.rows()) throw NumericalError("latency: output shape changed");
    }

    const double tick_ms =
        1e3 * static_cast<double>(Clock::period::num) / static_cast<double>(Clock::period::den);
    const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    if (mean < 1000.0 * tick_ms) {
      throw NumericalError("latency: mean run of " + std::to_string(mean) +
                           " ms is under 1000 clock ticks; increase the token count");
    }
    double ss = 0.0;
    for (double v : ms) ss += (v - mean) * (v - mean);
    std::vector<double> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    LatencySample s;
    s.kept_fraction = frac;
    s.kept_tokens = pos.size();
    s.mean_ms = mean;
    s.std_ms = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    s.median_ms = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    curve.samples.push_back(s);
  }

  std::vector<double> xs, ys;
  for (const auto& s : curve.samples) {
    xs.push_back(s.kept_fraction);
    ys.push_back(s.mean_ms);
  }
  const LinearFit fit = linear_fit(xs, ys);
  curve.slope = fit.slope;
  curve.intercept = fit.intercept;
  curve.r = fit.r;

  std::vector<std::size_t> order(curve.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curve.samples[a].kept_fraction < curve.samples[b].kept_fraction;
  });
  curve.monotone = true;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (curve.samples[order[i]].mean_ms < 0.98 * curve.samples[order[i - 1]].mean_ms) {
      curve.monotone = false;
    }
  }
  return curve;
}

}  // namespace lipar
