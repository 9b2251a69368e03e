#pragma once

#include <cstddef>
#include <span>

namespace lipar {

struct PearsonReport {
  double r = 0.0;
  std::size_t n_samples = 0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;  // population variances
  double var_y = 0.0;

  bool operator==(const PearsonReport&) const = default;
};

/// Pearson correlation of paired samples. Throws ValidationError on a length
/// mismatch, fewer than two samples, or a zero-variance population.
PearsonReport pearson(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace lipar
