#include "lipar/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lipar/random.hpp"

namespace lipar {
namespace {

Matrix gaussian_matrix(int rows, int cols, double stddev, Rng& rng) {
  std::normal_distribution<double> nd(0.0, stddev);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = static_cast<float>(nd(rng));
  return m;
}

void rms_norm_rows(const Matrix& in, Matrix& out) {
  out = Matrix(in.rows(), in.cols());
  for (int r = 0; r < in.rows(); ++r) {
    const auto row = in.row(r);
    double ss = 0.0;
    for (float v : row) ss += static_cast<double>(v) * v;
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(row.size()) + 1e-6);
    auto o = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) o[c] = static_cast<float>(row[c] * inv);
  }
}

void add_into(Matrix& x, const Matrix& delta) {
  auto xs = x.data();
  auto ds = delta.data();
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] += ds[i];
}

}  // namespace

void ToyDenoiserConfig::validate() const {
  if (n_blocks < 1) throw ValidationError("denoiser: n_blocks must be >= 1");
  if (model_dim < 1 || mlp_hidden < 1) throw ValidationError("denoiser: dims must be >= 1");
  heads.validate();
  if (n_steps < 1) throw ValidationError("denoiser: n_steps must be >= 1");
  if (!(initial_noise >= 0.0 && initial_noise <= 1.0)) {
    throw ValidationError("denoiser: initial_noise must lie in [0, 1]");
  }
  if (cache_window < 1) throw ValidationError("denoiser: cache_window must be >= 1");
  if (!(residual_scale >= 0.0)) throw ValidationError("denoiser: residual_scale must be >= 0");
  if (!(qk_alignment >= -1.0 && qk_alignment <= 1.0)) {
    throw ValidationError("denoiser: qk_alignment must lie in [-1, 1]");
  }
}

ToyDenoiser::ToyDenoiser(ToyDenoiserConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int dm = cfg_.model_dim, width = cfg_.heads.width(), hid = cfg_.mlp_hidden;
  const double a = cfg_.qk_alignment, b = std::sqrt(1.0 - a * a);
  for (int l = 0; l < cfg_.n_blocks; ++l) {
    Rng rng(derive_seed(cfg_.seed, {0xB10C, l}));
    const double s_in = 1.0 / std::sqrt(static_cast<double>(dm));
    BlockWeights w;
    w.qkv.wq = gaussian_matrix(dm, width, s_in, rng);
    Matrix g = gaussian_matrix(dm, width, s_in, rng);
    w.qkv.wk = Matrix(dm, width);
    for (std::size_t i = 0; i < g.data().size(); ++i) {
      w.qkv.wk.data()[i] = static_cast<float>(a * w.qkv.wq.data()[i] + b * g.data()[i]);
    }
    w.qkv.wv = gaussian_matrix(dm, width, s_in, rng);
    const double g_out = cfg_.residual_scale;
    w.wo = gaussian_matrix(width, dm, g_out / std::sqrt(static_cast<double>(width)), rng);
    w.w1 = gaussian_matrix(dm, hid, s_in, rng);
    w.b1.assign(static_cast<std::size_t>(hid), 0.0f);
    std::normal_distribution<double> nb(0.0, 0.1);
    for (auto& v : w.b1) v = static_cast<float>(nb(rng));
    w.w2 = gaussian_matrix(hid, dm, g_out / std::sqrt(static_cast<double>(hid)), rng);
    blocks_.push_back(std::move(w));
  }
}

Matrix ToyDenoiser::forward(std::span<const Position> positions, const Matrix& x,
                            const ForwardContext& ctx, std::vector<LayerKV>* record) const {
  if (x.rows() != static_cast<int>(positions.size()) || x.cols() != cfg_.model_dim) {
    throw DimensionError("denoiser: input must be tokens x model_dim (" +
                         std::to_string(cfg_.model_dim) + ")");
  }
  if (ctx.caches && static_cast<int>(ctx.caches->size()) != cfg_.n_blocks) {
    throw DimensionError("denoiser: need one KV cache per block");
  }
  if (record) record->clear();

  Matrix h = x;
  Matrix normed;
  for (int l = 0; l < cfg_.n_blocks; ++l) {
    const BlockWeights& w = blocks_[static_cast<std::size_t>(l)];
    rms_norm_rows(h, normed);
    Matrix q = multiply(normed, w.qkv.wq);
    Matrix k = multiply(normed, w.qkv.wk);
    Matrix v = multiply(normed, w.qkv.wv);

    const KVCache* cache = ctx.caches ? &(*ctx.caches)[static_cast<std::size_t>(l)] : nullptr;
    ActiveTokens active{positions, &k, &v};
    for (int i = 0; i < q.rows(); ++i) {
      rope_rotate_heads(q.row(i), cfg_.heads.n_heads, cfg_.heads.head_dim,
                        positions[static_cast<std::size_t>(i)], cfg_.rope);
    }
    Matrix attn = recovered_causal_attention(q, active, ctx.span, ctx.rows, ctx.cols, ctx.plan,
                                             cache, ctx.recovery, cfg_.rope, cfg_.heads);
    add_into(h, multiply(attn, w.wo));
    if (record) record->push_back(LayerKV{std::move(k), std::move(v)});

    rms_norm_rows(h, normed);
    Matrix hidden = multiply(normed, w.w1);
    for (int r = 0; r < hidden.rows(); ++r) {
      auto row = hidden.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = std::tanh(row[c] + w.b1[c]);
    }
    add_into(h, multiply(hidden, w.w2));
  }
  return h;
}

TokenSequence toy_denoiser(const TokenSequence& seq, const ToyDenoiser& model, int rows, int cols,
                           const RunLengthPlan* plan,
                           const std::optional<RecoveryConfig>& recovery) {
  require_canonical_order(seq.positions, "toy_denoiser");
  int frames = 0;
  for (const auto& p : seq.positions) frames = std::max(frames, p.t + 1);
  if (plan) frames = plan->frames();
  ForwardContext ctx;
  ctx.span = FrameSpan{0, frames};
  ctx.rows = rows;
  ctx.cols = cols;
  ctx.plan = plan;
  ctx.recovery = plan ? recovery : std::nullopt;
  return TokenSequence{seq.positions, model.forward(seq.positions, seq.embeddings, ctx)};
}

}  // namespace lipar
