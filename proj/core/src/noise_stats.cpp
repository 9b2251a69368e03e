#include "lipar/noise_stats.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include <Eigen/Dense>

#include "lipar/parallel.hpp"
#include "lipar/random.hpp"
#include "lipar/stats.hpp"

namespace lipar {
namespace {

struct Welford {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    n += 1.0;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  // Chan et al. pairwise merge.
  void merge(const Welford& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }
  double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
};

std::size_t shard_size(const NoiseModel& m, int shard) {
  const std::size_t base = m.n_samples / static_cast<std::size_t>(m.shards);
  const std::size_t extra = m.n_samples % static_cast<std::size_t>(m.shards);
  return base + (static_cast<std::size_t>(shard) < extra ? 1 : 0);
}

void fill_normal(Rng& rng, std::normal_distribution<double>& nd, std::vector<double>& v) {
  for (auto& x : v) x = nd(rng);
}

using DenseW = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

DenseW dense(const NoiseModel& m) {
  if (m.identity()) return DenseW();
  return Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
             m.w.data().data(), m.dim, m.dim)
      .cast<double>();
}

Eigen::Map<const Eigen::VectorXd> view(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

// a^T W b, or a . b for the identity model (empty W).
double bilinear(const DenseW& w, const std::vector<double>& a, const std::vector<double>& b) {
  if (w.size() == 0) return view(a).dot(view(b));
  return view(a).dot(w * view(b));
}

void apply_w(const DenseW& w, const std::vector<double>& in, std::vector<double>& out) {
  if (w.size() == 0) {
    out = in;
    return;
  }
  Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
      w * view(in);
}

MomentReport finish(const Welford& w, double target_mean, double target_var) {
  MomentReport rep;
  rep.n_samples = static_cast<std::size_t>(w.n);
  rep.mean = w.mean;
  rep.variance = w.variance();
  rep.target_mean = target_mean;
  rep.target_variance = target_var;
  rep.mean_stderr = std::sqrt(rep.variance / w.n);
  rep.mean_z = rep.mean_stderr > 0.0 ? (rep.mean - target_mean) / rep.mean_stderr : 0.0;
  rep.mean_rel_dev = target_mean != 0.0 ? std::abs(rep.mean - target_mean) / std::abs(target_mean) : 0.0;
  rep.variance_rel_dev =
      target_var > 0.0 ? std::abs(rep.variance - target_var) / target_var : 0.0;
  return rep;
}

}  // namespace

void NoiseModel::validate() const {
  if (dim < 1) throw ValidationError("noise model: dim must be >= 1");
  if (n_samples < 1000) throw ValidationError("noise model: need at least 1000 samples");
  if (shards < 1) throw ValidationError("noise model: shards must be >= 1");
  if (!identity() && (w.rows() != dim || w.cols() != dim)) {
    throw DimensionError("noise model: W must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  }
}

Matrix random_w(int dim, std::uint64_t seed) {
  if (dim < 1) throw ValidationError("random_w: dim must be >= 1");
  Rng rng(derive_seed(seed, {0x57}));
  std::normal_distribution<double> nd;
  const double s = 1.0 / std::sqrt(static_cast<double>(dim));
  Matrix w(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) w(r, c) = static_cast<float>((r == c ? 1.0 : 0.0) + s * nd(rng));
  return w;
}

double trace(const Matrix& w) {
  double s = 0.0;
  for (int i = 0; i < w.rows(); ++i) s += w(i, i);
  return s;
}

double frobenius_sq(const Matrix& w) {
  double s = 0.0;
  for (float v : w.data()) s += static_cast<double>(v) * v;
  return s;
}

double trace_sym_sq(const Matrix& w) {
  // Tr(S^2) = sum_ij S_ij^2 for symmetric S.
  double s = 0.0;
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) {
      const double v = 0.5 * (static_cast<double>(w(i, j)) + w(j, i));
      s += v * v;
    }
  return s;
}

MomentReport quadratic_form_moments(const NoiseModel& model, bool duplicated) {
  model.validate();
  const DenseW w = dense(model);
  std::vector<Welford> parts(static_cast<std::size_t>(model.shards));
  parallel_for(parts.size(), [&](std::size_t shard) {
    Rng rng(derive_seed(model.seed, {0x51, duplicated ? 1 : 0, static_cast<std::int64_t>(shard)}));
    std::normal_distribution<double> nd;
    std::vector<double> a(static_cast<std::size_t>(model.dim)), b(a.size());
    Welford acc;
    for (std::size_t s = shard_size(model, static_cast<int>(shard)); s > 0; --s) {
      fill_normal(rng, nd, a);
      if (duplicated) {
        acc.add(bilinear(w, a, a));
      } else {
        fill_normal(rng, nd, b);
        acc.add(bilinear(w, a, b));
      }
    }
    parts[shard] = acc;
  });
  Welford total;
  for (const auto& p : parts) total.merge(p);

  const double tm = duplicated ? (model.identity() ? model.dim : trace(model.w)) : 0.0;
  const double tv = duplicated ? 2.0 * (model.identity() ? model.dim : trace_sym_sq(model.w))
                               : (model.identity() ? model.dim : frobenius_sq(model.w));
  return finish(total, tm, tv);
}

MomentReport aggregation_variance(const NoiseModel& model, int n, bool duplicated) {
  model.validate();
  if (n < 1) throw ValidationError("aggregation_variance: n must be >= 1");
  const auto dim = static_cast<std::size_t>(model.dim);
  const DenseW w = dense(model);
  std::vector<std::vector<Welford>> parts(static_cast<std::size_t>(model.shards));
  parallel_for(parts.size(), [&](std::size_t shard) {
    // Same stream for both modes and every n so n = 1 coincides exactly.
    Rng rng(derive_seed(model.seed, {0x41, n, static_cast<std::int64_t>(shard)}));
    std::normal_distribution<double> nd;
    std::vector<double> eps(dim), sum(dim), out(dim);
    std::vector<Welford> acc(dim);
    for (std::size_t s = shard_size(model, static_cast<int>(shard)); s > 0; --s) {
      fill_normal(rng, nd, sum);
      if (duplicated) {
        for (auto& v : sum) v *= n;
      } else {
        for (int j = 1; j < n; ++j) {
          fill_normal(rng, nd, eps);
          for (std::size_t d = 0; d < dim; ++d) sum[d] += eps[d];
        }
      }
      apply_w(w, sum, out);
      for (std::size_t d = 0; d < dim; ++d) acc[d].add(out[d]);
    }
    parts[shard] = std::move(acc);
  });

  // Pool coordinates: average the per-coordinate means and variances.
  double mean = 0.0, var = 0.0, count = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    Welford c;
    for (const auto& p : parts) c.merge(p[d]);
    mean += c.mean;
    var += c.variance();
    count = c.n;
  }
  Welford pooled;
  pooled.n = count;
  pooled.mean = mean / static_cast<double>(dim);
  pooled.m2 = var / static_cast<double>(dim) * (count - 1.0);

  const double scale = duplicated ? static_cast<double>(n) * n : static_cast<double>(n);
  const double per_coord = (model.identity() ? static_cast<double>(model.dim) : frobenius_sq(model.w)) /
                           static_cast<double>(model.dim);
  return finish(pooled, 0.0, scale * per_coord);
}

AggregationSweep aggregation_sweep(const NoiseModel& model, std::span<const int> ns,
                                   bool duplicated) {
  if (ns.size() < 2) throw ValidationError("aggregation_sweep: need at least two values of n");
  AggregationSweep sw;
  sw.duplicated = duplicated;
  std::vector<double> lx, ly;
  for (int n : ns) {
    const auto rep = aggregation_variance(model, n, duplicated);
    sw.n.push_back(n);
    sw.variance.push_back(rep.variance);
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(rep.variance));
  }
  const LinearFit fit = linear_fit(lx, ly);
  sw.exponent = fit.slope;
  sw.intercept = fit.intercept;
  return sw;
}

}  // namespace lipar
