#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "lipar/attention.hpp"
#include "lipar/rope.hpp"
#include "oracles/attention_reference.hpp"

using namespace lipar;

namespace {

std::vector<float> gaussian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<float> g;
  std::vector<float> v(n);
  for (auto& e : v) e = g(rng);
  return v;
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

}  // namespace

TEST_CASE("rope at the origin is the identity") {
  std::mt19937_64 rng(1);
  const auto v = gaussian(16, rng);
  for (RopeMode mode : {RopeMode::temporal, RopeMode::factorized}) {
    RoPEConfig cfg;
    cfg.mode = mode;
    CHECK(rope_rotate(v, {0, 0, 0}, cfg) == v);
  }
}

TEST_CASE("rope preserves norms") {
  std::mt19937_64 rng(2);
  const auto v = gaussian(32, rng);
  for (RopeMode mode : {RopeMode::temporal, RopeMode::factorized}) {
    RoPEConfig cfg;
    cfg.mode = mode;
    const auto r = rope_rotate(v, {7, 3, 5}, cfg);
    CHECK(norm(r) == doctest::Approx(norm(v)).epsilon(1e-6));
  }
}

TEST_CASE("rope angles add") {
  std::mt19937_64 rng(3);
  const auto v = gaussian(16, rng);
  RoPEConfig cfg;
  const auto once = rope_rotate(rope_rotate(v, {3, 0, 0}, cfg), {5, 0, 0}, cfg);
  const auto direct = rope_rotate(v, {8, 0, 0}, cfg);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(once[i] == doctest::Approx(direct[i]).epsilon(1e-5));
}

TEST_CASE("rope scores depend only on the relative offset") {
  std::mt19937_64 rng(4);
  const auto q = gaussian(16, rng);
  const auto k = gaussian(16, rng);
  RoPEConfig cfg;
  const double a = dot(rope_rotate(q, {9, 0, 0}, cfg), rope_rotate(k, {4, 0, 0}, cfg));
  const double b = dot(rope_rotate(q, {15, 0, 0}, cfg), rope_rotate(k, {10, 0, 0}, cfg));
  CHECK(a == doctest::Approx(b).epsilon(1e-5));
}

TEST_CASE("rope rotates only the configured span") {
  std::mt19937_64 rng(5);
  const auto v = gaussian(16, rng);
  RoPEConfig cfg;
  cfg.rotated_dims = 8;
  const auto r = rope_rotate(v, {4, 0, 0}, cfg);
  for (std::size_t i = 8; i < 16; ++i) CHECK(r[i] == v[i]);
  cfg.rotated_dims = 7;
  CHECK_THROWS_AS(rope_rotate(v, {1, 0, 0}, cfg), ValidationError);
  cfg.rotated_dims = 18;
  CHECK_THROWS_AS(rope_rotate(v, {1, 0, 0}, cfg), ValidationError);
}

TEST_CASE("rope frequency") {
  CHECK(rope_frequency(0, 16, 10000.0) == 1.0);
  CHECK(rope_frequency(4, 16, 10000.0) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("single key returns its value") {
  HeadConfig h{2, 4};
  Matrix q(1, 8, std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8});
  Matrix k(1, 8, std::vector<float>{-1, 0, 2, 1, 0, 3, 1, 1});
  Matrix v(1, 8, std::vector<float>{9, 8, 7, 6, 5, 4, 3, 2});
  const std::vector<int> qf{0}, kf{0};
  CHECK(exact_attention(q, qf, k, v, kf, h, true) == v);
}

TEST_CASE("identical keys average the values") {
  HeadConfig h{1, 4};
  Matrix q(1, 4, std::vector<float>{0.3f, -1, 2, 0.5f});
  Matrix k(3, 4);
  Matrix v(3, 4);
  for (int j = 0; j < 3; ++j)
    for (int d = 0; d < 4; ++d) {
      k(j, d) = 0.7f;
      v(j, d) = static_cast<float>(j * 4 + d);
    }
  const std::vector<int> qf{0}, kf{0, 0, 0};
  const Matrix out = exact_attention(q, qf, k, v, kf, h, false);
  for (int d = 0; d < 4; ++d) CHECK(out(0, d) == doctest::Approx(4.0 + d).epsilon(1e-6));
}

TEST_CASE("exact attention agrees with the long-double reference") {
  const int N = 16, D = 8;
  for (int heads : {1, 2}) {
    const int hd = D / heads;
    HeadConfig h{heads, hd};
    std::mt19937_64 rng(10 + heads);
    Matrix q(N, D, gaussian(N * D, rng)), k(N, D, gaussian(N * D, rng)), v(N, D, gaussian(N * D, rng));
    std::vector<int> frames(N);
    for (int i = 0; i < N; ++i) frames[i] = i / 4;
    for (bool causal : {true, false}) {
      const Matrix out = exact_attention(q, frames, k, v, frames, h, causal);
      for (int i = 0; i < N; ++i) {
        for (int hh = 0; hh < heads; ++hh) {
          std::vector<oracle::Row> ks, vs;
          for (int j = 0; j < N; ++j) {
            ks.emplace_back(k.row(j).begin() + hh * hd, k.row(j).begin() + (hh + 1) * hd);
            vs.emplace_back(v.row(j).begin() + hh * hd, v.row(j).begin() + (hh + 1) * hd);
          }
          const oracle::Row qr(q.row(i).begin() + hh * hd, q.row(i).begin() + (hh + 1) * hd);
          const oracle::Row ref =
              oracle::attend(qr, frames[i], ks, vs, frames, causal, 1.0L / std::sqrt((long double)hd));
          for (int d = 0; d < hd; ++d) {
            CHECK(std::fabs(out(i, hh * hd + d) - static_cast<double>(ref[d])) <= 1e-6);
          }
        }
      }
    }
  }
}

TEST_CASE("large logits stay finite") {
  HeadConfig h{1, 2, 1.0};
  Matrix q(1, 2, std::vector<float>{1000, 0});
  Matrix k(2, 2, std::vector<float>{1000, 0, 999, 0});
  Matrix v(2, 2, std::vector<float>{1, 0, 0, 1});
  const std::vector<int> qf{0}, kf{0, 0};
  const Matrix out = exact_attention(q, qf, k, v, kf, h, true);
  CHECK(std::isfinite(out(0, 0)));
  CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("causal attention rejects a query with no visible key") {
  HeadConfig h{1, 2};
  Matrix q(1, 2, 1.0f), k(1, 2, 1.0f), v(1, 2, 1.0f);
  const std::vector<int> qf{0}, kf{1};
  CHECK_THROWS_AS(exact_attention(q, qf, k, v, kf, h, true), ValidationError);
  const std::vector<int> bad{0, 0};
  CHECK_THROWS_AS(exact_attention(q, qf, k, v, bad, h, true), DimensionError);
}

TEST_CASE("head config") {
  HeadConfig h{4, 16};
  CHECK(h.effective_scale() == 0.25);
  CHECK(h.width() == 64);
  HeadConfig odd{2, 3};
  CHECK_THROWS_AS(odd.validate(), ValidationError);
}
