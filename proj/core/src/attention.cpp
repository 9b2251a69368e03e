#include "lipar/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipar/parallel.hpp"

namespace lipar {

double HeadConfig::effective_scale() const {
  return scale > 0.0 ? scale : 1.0 / std::sqrt(static_cast<double>(head_dim));
}

void HeadConfig::validate() const {
  if (n_heads < 1) throw ValidationError("head config: n_heads must be >= 1");
  if (head_dim < 2 || head_dim % 2 != 0) {
    throw ValidationError("head config: head_dim must be even and positive");
  }
  if (scale < 0.0) throw ValidationError("head config: scale must be > 0");
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Queries sharing a visible key prefix are processed as one GEMM tile.
constexpr int kQueryTile = 64;

}  // namespace

Matrix exact_attention(const Matrix& queries, std::span<const int> query_frames,
                       const Matrix& keys, const Matrix& values,
                       std::span<const int> key_frames, const HeadConfig& heads, bool causal) {
  heads.validate();
  const int width = heads.width();
  if (queries.cols() != width || keys.cols() != width || values.cols() != width) {
    throw DimensionError("attention: row width != n_heads * head_dim");
  }
  if (keys.rows() != values.rows()) throw DimensionError("attention: key/value counts differ");
  if (static_cast<int>(query_frames.size()) != queries.rows() ||
      static_cast<int>(key_frames.size()) != keys.rows()) {
    throw DimensionError("attention: frame index count differs from row count");
  }

  const int nq = queries.rows(), nk = keys.rows(), hd = heads.head_dim, nh = heads.n_heads;
  const double scale = heads.effective_scale();
  Matrix out(nq, width);
  if (nq == 0) return out;

  // Keys in ascending frame order (stable), so the causally visible keys of
  // any query form a prefix.
  std::vector<int> order(static_cast<std::size_t>(nk));
  std::iota(order.begin(), order.end(), 0);
  if (causal && !std::is_sorted(key_frames.begin(), key_frames.end())) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return key_frames[a] < key_frames[b]; });
  }
  std::vector<int> sorted_frames(static_cast<std::size_t>(nk));
  std::vector<RowMajor> kh(static_cast<std::size_t>(nh), RowMajor(nk, hd));
  std::vector<RowMajor> vh(static_cast<std::size_t>(nh), RowMajor(nk, hd));
  for (int j = 0; j < nk; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    sorted_frames[static_cast<std::size_t>(j)] = key_frames[src];
    const auto kr = keys.row(src);
    const auto vr = values.row(src);
    for (int h = 0; h < nh; ++h)
      for (int d = 0; d < hd; ++d) {
        const std::size_t c = static_cast<std::size_t>(h * hd + d);
        kh[static_cast<std::size_t>(h)](j, d) = kr[c];
        vh[static_cast<std::size_t>(h)](j, d) = vr[c];
      }
  }

  std::vector<int> qlimit(static_cast<std::size_t>(nq));
  for (int i = 0; i < nq; ++i) {
    const int lim = causal ? static_cast<int>(std::upper_bound(sorted_frames.begin(),
                                                               sorted_frames.end(),
                                                               query_frames[i]) -
                                              sorted_frames.begin())
                           : nk;
    if (lim == 0) {
      throw ValidationError("attention: query " + std::to_string(i) + " at frame " +
                            std::to_string(query_frames[i]) + " has no visible key");
    }
    qlimit[static_cast<std::size_t>(i)] = lim;
  }
  std::vector<int> qorder(static_cast<std::size_t>(nq));
  std::iota(qorder.begin(), qorder.end(), 0);
  std::stable_sort(qorder.begin(), qorder.end(),
                   [&](int a, int b) { return qlimit[a] < qlimit[b]; });
  std::vector<std::pair<int, int>> tiles;
  for (int b = 0; b < nq;) {
    int e = b + 1;
    while (e < nq && e - b < kQueryTile && qlimit[qorder[e]] == qlimit[qorder[b]]) ++e;
    tiles.emplace_back(b, e);
    b = e;
  }

  parallel_for(tiles.size(), [&](std::size_t ti) {
    const auto [b, e] = tiles[ti];
    const int n = e - b;
    const int limit = qlimit[static_cast<std::size_t>(qorder[b])];
    RowMajor q(n, hd), logits, o;
    for (int h = 0; h < nh; ++h) {
      for (int a = 0; a < n; ++a) {
        const auto qr = queries.row(qorder[b + a]);
        for (int d = 0; d < hd; ++d) q(a, d) = qr[static_cast<std::size_t>(h * hd + d)];
      }
      const auto& K = kh[static_cast<std::size_t>(h)];
      const auto& V = vh[static_cast<std::size_t>(h)];
      logits.noalias() = q * K.topRows(limit).transpose();
      logits *= scale;
      const Eigen::VectorXd mx = logits.rowwise().maxCoeff();
      logits = (logits.colwise() - mx).array().exp().matrix();
      const Eigen::VectorXd denom = logits.rowwise().sum();
      o.noalias() = logits * V.topRows(limit);
      for (int a = 0; a < n; ++a) {
        auto orow = out.row(qorder[b + a]);
        for (int d = 0; d < hd; ++d) {
          orow[static_cast<std::size_t>(h * hd + d)] = static_cast<float>(o(a, d) / denom(a));
        }
      }
    }
  });
  return out;
}

}  // namespace lipar
