#pragma once

// Monte-Carlo checks of how duplicated Gaussian noise changes attention
// statistics: the quadratic form eps_i^T W eps_j, and the variance of summed
// value noise.

#include <cstdint>
#include <span>
#include <vector>

#include "lipar/tensor.hpp"

namespace lipar {

struct NoiseModel {
  int dim = 256;
  Matrix w;  // dim x dim; empty means identity
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
  int shards = 16;  // per-shard seeds, merged in shard order

  bool identity() const { return w.rows() == 0; }
  void validate() const;
};

struct MomentReport {
  std::size_t n_samples = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double target_mean = 0.0;
  double target_variance = 0.0;
  double mean_stderr = 0.0;       // sqrt(variance / n)
  double mean_z = 0.0;            // (mean - target_mean) / mean_stderr
  double mean_rel_dev = 0.0;      // |mean - target| / |target|; 0 when target is 0
  double variance_rel_dev = 0.0;  // |variance - target| / target

  bool operator==(const MomentReport&) const = default;
};

/// W = I + G / sqrt(dim), G standard normal: asymmetric with a large trace.
Matrix random_w(int dim, std::uint64_t seed);

/// Analytic targets for the quadratic form.
double trace(const Matrix& w);
double frobenius_sq(const Matrix& w);
double trace_sym_sq(const Matrix& w);  // Tr(W_sym^2), W_sym = (W + W^T) / 2

/// Samples eps_i^T W eps_j with eps_j independent of eps_i, or eps_j = eps_i
/// when `duplicated`.
MomentReport quadratic_form_moments(const NoiseModel& model, bool duplicated);

/// Per-coordinate moments of W (sum_{j<n} eps_j) (independent) or
/// W (n eps) (duplicated), pooled over coordinates.
MomentReport aggregation_variance(const NoiseModel& model, int n, bool duplicated);

struct AggregationSweep {
  bool duplicated = false;
  std::vector<int> n;
  std::vector<double> variance;
  double exponent = 0.0;  // slope of log variance against log n
  double intercept = 0.0;

  bool operator==(const AggregationSweep&) const = default;
};
AggregationSweep aggregation_sweep(const NoiseModel& model, std::span<const int> ns,
                                   bool duplicated);

}  // namespace lipar
