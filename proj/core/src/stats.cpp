#include "lipar/stats.hpp"

#include <cmath>
#include <limits>

#include "lipar/errors.hpp"

namespace lipar {
namespace {

struct Moments {
  double mean_x = 0, mean_y = 0, m2x = 0, m2y = 0, cxy = 0;
};

// Single pass, Welford co-moment update.
Moments one_pass(std::span<const double> x, std::span<const double> y) {
  Moments m;
  double n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    n += 1;
    const double dx = x[i] - m.mean_x;
    m.mean_x += dx / n;
    const double dy = y[i] - m.mean_y;
    m.mean_y += dy / n;
    m.m2x += dx * (x[i] - m.mean_x);
    m.m2y += dy * (y[i] - m.mean_y);
    m.cxy += dx * (y[i] - m.mean_y);
  }
  return m;
}

Moments two_pass(std::span<const double> x, std::span<const double> y) {
  Moments m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.mean_x += x[i];
    m.mean_y += y[i];
  }
  m.mean_x /= static_cast<double>(x.size());
  m.mean_y /= static_cast<double>(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x, dy = y[i] - m.mean_y;
    m.m2x += dx * dx;
    m.m2y += dy * dy;
    m.cxy += dx * dy;
  }
  return m;
}

bool underflowed(double m2, double mean, std::size_t n) {
  return m2 <= 64 * std::numeric_limits<double>::epsilon() * mean * mean * static_cast<double>(n);
}

}  // namespace

PearsonReport pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: sample counts differ");
  if (x.size() < 2) throw ValidationError("pearson: need at least two samples");
  Moments m = one_pass(x, y);
  if (underflowed(m.m2x, m.mean_x, x.size()) || underflowed(m.m2y, m.mean_y, y.size())) {
    m = two_pass(x, y);
  }
  if (!(m.m2x > 0.0) || !(m.m2y > 0.0)) {
    throw ValidationError("pearson: a population has zero variance");
  }
  const double n = static_cast<double>(x.size());
  PearsonReport rep;
  rep.n_samples = x.size();
  rep.mean_x = m.mean_x;
  rep.mean_y = m.mean_y;
  rep.var_x = m.m2x / n;
  rep.var_y = m.m2y / n;
  rep.r = m.cxy / std::sqrt(m.m2x * m.m2y);
  return rep;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("linear_fit: sample counts differ");
  if (x.size() < 2) throw ValidationError("linear_fit: need at least two samples");
  const Moments m = two_pass(x, y);
  if (!(m.m2x > 0.0)) throw ValidationError("linear_fit: x has zero variance");
  LinearFit fit;
  fit.slope = m.cxy / m.m2x;
  fit.intercept = m.mean_y - fit.slope * m.mean_x;
  fit.r = m.m2y > 0.0 ? m.cxy / std::sqrt(m.m2x * m.m2y) : 0.0;
  return fit;
}

}  // namespace lipar
