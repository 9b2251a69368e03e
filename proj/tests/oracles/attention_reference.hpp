#pragma once

// Naive long-double attention with its own rotary embedding, for checking
// exact_attention, full_attention and recovered_attention.

#include <cmath>
#include <vector>

namespace oracle {

using Row = std::vector<long double>;

/// Temporal RoPE on one head slice: pair i turns by t * base^(-2i / d).
inline Row rotate(const Row& v, int t, long double base = 10000.0L) {
  Row out = v;
  const int d = static_cast<int>(v.size());
  for (int i = 0; i < d / 2; ++i) {
    const long double a = t * std::pow(base, -2.0L * i / d);
    out[2 * i] = v[2 * i] * std::cos(a) - v[2 * i + 1] * std::sin(a);
    out[2 * i + 1] = v[2 * i] * std::sin(a) + v[2 * i + 1] * std::cos(a);
  }
  return out;
}

/// Softmax attention of one query over keys[j] (j with frames[j] <= qt when
/// causal), all rows already rotated, one head.
inline Row attend(const Row& q, int qt, const std::vector<Row>& keys,
                  const std::vector<Row>& values, const std::vector<int>& frames, bool causal,
                  long double scale) {
  std::vector<long double> logits;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    if (causal && frames[j] > qt) continue;
    long double s = 0;
    for (std::size_t d = 0; d < q.size(); ++d) s += q[d] * keys[j][d];
    logits.push_back(s * scale);
    idx.push_back(j);
  }
  long double mx = logits.empty() ? 0 : logits[0];
  for (auto l : logits) mx = std::max(mx, l);
  long double den = 0;
  Row out(values.empty() ? 0 : values[0].size(), 0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const long double w = std::exp(logits[i] - mx);
    den += w;
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += w * values[idx[i]][d];
  }
  for (auto& v : out) v /= den;
  return out;
}

/// x W for a row vector x and a row-major (rows x cols) matrix.
inline Row project(const std::vector<float>& x, const std::vector<float>& w, int cols) {
  Row out(cols, 0);
  for (std::size_t r = 0; r < x.size(); ++r)
    for (int c = 0; c < cols; ++c) out[c] += static_cast<long double>(x[r]) * w[r * cols + c];
  return out;
}

}  // namespace oracle
