#include "lipar/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "lipar/random.hpp"
#include "lipar/restoration.hpp"

namespace lipar {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Gaussian noise for one token at one step, keyed by position so pruned and
// unpruned runs see identical noise.
void add_step_noise(std::span<float> row, double sigma, std::uint64_t seed, int step, Position p) {
  Rng rng(derive_seed(seed, {step, p.t, p.y, p.x}));
  std::normal_distribution<double> nd;
  for (auto& v : row) v = static_cast<float>((1.0 - sigma) * v + sigma * nd(rng));
}

struct Denoised {
  std::vector<float> kept;  // kept patch vectors, mask order
};

// Writes the clean K/V of one block into each layer's cache. Pruned
// positions are forward-filled from the latest clean entry at their
// location when recovery is on, and left as holes otherwise.
void write_caches(std::vector<KVCache>& caches, std::vector<LayerKV>& record,
                  std::span<const Position> positions, const KeepMaskSequence& mask,
                  FrameSpan span, bool fill, std::vector<std::vector<float>>& last_k,
                  std::vector<std::vector<float>>& last_v) {
  const int rows = mask.rows(), cols = mask.cols(), locs = rows * cols;
  for (std::size_t l = 0; l < caches.size(); ++l) {
    const int width = caches[l].width();
    auto& lk = last_k[l];
    auto& lv = last_v[l];
    std::size_t next = 0;
    for (int t = span.begin; t < span.end; ++t) {
      FrameKV f{t, Matrix(locs, width), Matrix(locs, width),
                std::vector<std::uint8_t>(static_cast<std::size_t>(locs), 0), true};
      for (int loc = 0; loc < locs; ++loc) {
        const int y = loc / cols, x = loc % cols;
        auto kd = f.keys.row(loc);
        auto vd = f.values.row(loc);
        const std::size_t off = static_cast<std::size_t>(loc) * width;
        if (mask.at(t, y, x)) {
          const Position& p = positions[next];
          if (p.t != t || p.y != y || p.x != x) throw Error("cache write: token order mismatch");
          auto ks = record[l].keys.row(static_cast<int>(next));
          auto vs = record[l].values.row(static_cast<int>(next));
          std::copy(ks.begin(), ks.end(), lk.begin() + static_cast<std::ptrdiff_t>(off));
          std::copy(vs.begin(), vs.end(), lv.begin() + static_cast<std::ptrdiff_t>(off));
          ++next;
        } else if (!fill) {
          continue;
        }
        std::copy_n(lk.begin() + static_cast<std::ptrdiff_t>(off), width, kd.begin());
        std::copy_n(lv.begin() + static_cast<std::ptrdiff_t>(off), width, vd.begin());
        f.present[static_cast<std::size_t>(loc)] = 1;
      }
      caches[l].append(std::move(f));
    }
  }
}

std::vector<float> denoise_kept(const PatchGrid& patches, const KeepMaskSequence& mask,
                                const PipelineConfig& cfg, const ToyDenoiser& model,
                                const Embedding& emb) {
  const auto& dc = model.config();
  const int rows = mask.rows(), cols = mask.cols(), width = dc.heads.width();
  const int S = cfg.prune.block_size;
  const RunLengthPlan plan = build_plan(mask);

  std::vector<KVCache> caches;
  for (int l = 0; l < dc.n_blocks; ++l) caches.emplace_back(rows, cols, width, dc.cache_window);
  const std::size_t locs = static_cast<std::size_t>(rows) * cols;
  std::vector<std::vector<float>> last_k(static_cast<std::size_t>(dc.n_blocks),
                                         std::vector<float>(locs * width));
  std::vector<std::vector<float>> last_v = last_k;

  std::vector<float> out;
  out.reserve(count_true(mask) * static_cast<std::size_t>(patches.patch_length()));
  for (int begin = 0; begin < mask.frames(); begin += S) {
    const FrameSpan span{begin, std::min(begin + S, mask.frames())};
    std::vector<Position> pos;
    std::vector<float> raw;
    for (int t = span.begin; t < span.end; ++t)
      for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x)
          if (mask.at(t, y, x)) {
            pos.push_back({t, y, x});
            auto p = patches.patch(t, y, x);
            raw.insert(raw.end(), p.begin(), p.end());
          }
    Matrix xhat(static_cast<int>(pos.size()), patches.patch_length(), std::move(raw));

    ForwardContext ctx;
    ctx.span = span;
    ctx.rows = rows;
    ctx.cols = cols;
    ctx.plan = &plan;
    ctx.recovery = cfg.recovery;
    ctx.caches = &caches;

    // Noise is mixed into the latent estimate; the denoiser sees its embedding.
    for (int s = 0; s < dc.n_steps; ++s) {
      const double sigma = dc.initial_noise * (dc.n_steps - s) / dc.n_steps;
      Matrix xin = xhat;
      for (int i = 0; i < xin.rows(); ++i) {
        add_step_noise(xin.row(i), sigma, cfg.noise_seed, s, pos[static_cast<std::size_t>(i)]);
      }
      xhat = emb.project(model.forward(pos, emb.embed(xin), ctx));
    }
    std::vector<LayerKV> record;
    model.forward(pos, emb.embed(xhat), ctx, &record);
    write_caches(caches, record, pos, mask, span, cfg.recovery.has_value(), last_k, last_v);

    out.insert(out.end(), xhat.data().begin(), xhat.data().end());
  }
  return out;
}

}  // namespace

Embedding::Embedding(int patch_length, int model_dim, std::uint64_t seed) {
  if (patch_length < 1 || model_dim < patch_length) {
    throw ValidationError("embedding: model_dim (" + std::to_string(model_dim) +
                          ") must be >= patch length (" + std::to_string(patch_length) + ")");
  }
  Rng rng(derive_seed(seed, {0xE3B}));
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> rows;
  while (static_cast<int>(rows.size()) < patch_length) {
    std::vector<double> v(static_cast<std::size_t>(model_dim));
    for (auto& x : v) x = nd(rng);
    // Modified Gram-Schmidt, two passes for orthogonality at float precision.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : rows) {
        double d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * u[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * u[i];
      }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-8) continue;
    for (auto& x : v) x /= n;
    rows.push_back(std::move(v));
  }
  e_ = Matrix(patch_length, model_dim);
  for (int r = 0; r < patch_length; ++r)
    for (int c = 0; c < model_dim; ++c) e_(r, c) = static_cast<float>(rows[r][c]);
  et_ = transpose(e_);
}

Matrix Embedding::embed(const Matrix& patches) const { return multiply(patches, e_); }
Matrix Embedding::project(const Matrix& tokens) const { return multiply(tokens, et_); }

void PipelineConfig::validate() const {
  prune.validate();
  denoiser.validate();
  if (recovery) recovery->validate();
}

double relative_l2(std::span<const float> a, std::span<const float> reference) {
  if (a.size() != reference.size()) throw DimensionError("relative_l2: lengths differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - reference[i];
    num += d * d;
    den += static_cast<double>(reference[i]) * reference[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

PipelineResult run_pipeline_with_mask(const LatentGrid& latents, const KeepMaskSequence& mask,
                                      const PipelineConfig& cfg, bool compare_baseline) {
  cfg.validate();
  const auto t0 = Clock::now();
  const PatchGrid patches = patchify(latents, cfg.prune.patch);
  if (mask.frames() != patches.frames() || mask.rows() != patches.rows() ||
      mask.cols() != patches.cols()) {
    throw DimensionError("pipeline: mask extents differ from the patch grid");
  }
  require_first_frame_kept(mask, "pipeline");

  const ToyDenoiser model(cfg.denoiser);
  const Embedding emb(patches.patch_length(), cfg.denoiser.model_dim, cfg.denoiser.seed);

  PipelineResult res;
  res.mask = mask;
  res.stats.tokens = mask.size();
  res.stats.kept_tokens = count_true(mask);
  res.stats.prune_rate = prune_rate(mask);

  auto td = Clock::now();
  std::vector<float> kept = denoise_kept(patches, mask, cfg, model, emb);
  res.stats.denoise_ms = ms_since(td);

  auto tr = Clock::now();
  const PrunedPatchSet set = make_pruned_set(mask, patches.patch_dims(), patches.channels(),
                                             std::move(kept));
  res.output = unpatchify(restore(set));
  res.stats.restore_ms = ms_since(tr);
  res.stats.total_ms = ms_since(t0);

  if (compare_baseline) {
    PipelineConfig base = cfg;
    base.recovery.reset();
    const auto all = all_true(mask.frames(), mask.rows(), mask.cols());
    const PipelineResult ref = run_pipeline_with_mask(latents, all, base, false);
    res.stats.distance_to_baseline = relative_l2(res.output.data(), ref.output.data());
  }
  return res;
}

PipelineResult run_pipeline(const LatentGrid& latents, const PipelineConfig& cfg,
                            bool compare_baseline) {
  cfg.validate();
  const auto t0 = Clock::now();
  const KeepMaskSequence mask = lif_prune(patchify(latents, cfg.prune.patch), cfg.prune);
  const double prune_ms = ms_since(t0);
  PipelineResult res = run_pipeline_with_mask(latents, mask, cfg, compare_baseline);
  res.stats.prune_ms = prune_ms;
  res.stats.total_ms += prune_ms;
  return res;
}

TokenSequence select_kept(const TokenSequence& x, const KeepMaskSequence& mask) {
  TokenSequence out;
  std::vector<float> rows;
  for (std::size_t i = 0; i < x.positions.size(); ++i) {
    const auto& p = x.positions[i];
    if (p.t >= mask.frames() || p.y >= mask.rows() || p.x >= mask.cols()) {
      throw DimensionError("select_kept: token outside the mask");
    }
    if (!mask.at(p.t, p.y, p.x)) continue;
    out.positions.push_back(p);
    auto r = x.embeddings.row(static_cast<int>(i));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  out.embeddings = Matrix(static_cast<int>(out.positions.size()), x.embeddings.cols(), std::move(rows));
  return out;
}

CommutationGap commutation_gap(const TokenSequence& x, const KeepMaskSequence& mask,
                               const ToyDenoiser& model, const RecoveryConfig& recovery) {
  require_first_frame_kept(mask, "commutation_gap");
  if (x.size() != mask.size()) {
    throw DimensionError("commutation_gap: sequence must cover the full mask grid");
  }
  const int rows = mask.rows(), cols = mask.cols();
  const RunLengthPlan plan = build_plan(mask);
  const TokenSequence full = toy_denoiser(x, model, rows, cols, nullptr, std::nullopt);
  const TokenSequence target = select_kept(full, mask);
  const TokenSequence kept = select_kept(x, mask);
  const TokenSequence rec = toy_denoiser(kept, model, rows, cols, &plan, recovery);
  const TokenSequence direct = toy_denoiser(kept, model, rows, cols, &plan, std::nullopt);
  return {relative_l2(rec.embeddings.data(), target.embeddings.data()),
          relative_l2(direct.embeddings.data(), target.embeddings.data())};
}

}  // namespace lipar
