#include <cmath>
#include <vector>

#include "doctest.h"
#include "lipar/noise_stats.hpp"

using namespace lipar;

namespace {

NoiseModel model(int dim, std::size_t n, std::uint64_t seed) {
  NoiseModel m;
  m.dim = dim;
  m.n_samples = n;
  m.seed = seed;
  return m;
}

}  // namespace

TEST_CASE("identity quadratic form moments") {
  const NoiseModel m = model(64, 20000, 1);
  const MomentReport dup = quadratic_form_moments(m, true);
  CHECK(dup.target_mean == 64.0);
  CHECK(dup.target_variance == 128.0);
  CHECK(dup.mean_rel_dev < 0.02);
  CHECK(dup.variance_rel_dev < 0.05);

  const MomentReport ind = quadratic_form_moments(m, false);
  CHECK(ind.target_mean == 0.0);
  CHECK(ind.target_variance == 64.0);
  CHECK(std::fabs(ind.mean_z) < 5.0);
  CHECK(ind.variance_rel_dev < 0.05);
}

TEST_CASE("general W targets") {
  const Matrix w = random_w(32, 4);
  NoiseModel m = model(32, 40000, 2);
  m.w = w;
  const MomentReport dup = quadratic_form_moments(m, true);
  CHECK(dup.target_mean == doctest::Approx(trace(w)).epsilon(1e-12));
  CHECK(dup.target_variance == doctest::Approx(2.0 * trace_sym_sq(w)).epsilon(1e-12));
  CHECK(dup.mean_rel_dev < 0.05);
  CHECK(dup.variance_rel_dev < 0.05);
  const MomentReport ind = quadratic_form_moments(m, false);
  CHECK(ind.target_variance == doctest::Approx(frobenius_sq(w)).epsilon(1e-12));
  CHECK(ind.variance_rel_dev < 0.05);
}

TEST_CASE("trace helpers") {
  Matrix w(2, 2, std::vector<float>{1, 2, 0, 3});
  CHECK(trace(w) == 4.0);
  CHECK(frobenius_sq(w) == 14.0);
  CHECK(trace_sym_sq(w) == doctest::Approx(1.0 + 9.0 + 2.0).epsilon(1e-15));
}

TEST_CASE("moments do not depend on the thread count") {
  const NoiseModel m = model(16, 5000, 3);
  CHECK(quadratic_form_moments(m, true) == quadratic_form_moments(m, true));
}

TEST_CASE("aggregation exponents") {
  const NoiseModel m = model(16, 5000, 5);
  const std::vector<int> ns{1, 2, 4, 8, 16};
  const AggregationSweep dup = aggregation_sweep(m, ns, true);
  const AggregationSweep ind = aggregation_sweep(m, ns, false);
  CHECK(dup.exponent == doctest::Approx(2.0).epsilon(0.05));
  CHECK(ind.exponent == doctest::Approx(1.0).epsilon(0.1));
  CHECK(dup.n == ns);
}

TEST_CASE("aggregation of n = 1 agrees across modes") {
  const NoiseModel m = model(8, 4000, 6);
  const MomentReport d = aggregation_variance(m, 1, true);
  const MomentReport i = aggregation_variance(m, 1, false);
  CHECK(d.target_variance == 1.0);
  CHECK(i.target_variance == 1.0);
}

TEST_CASE("noise model validation") {
  NoiseModel m = model(0, 10, 0);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = model(4, 1, 0);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = model(4, 100, 0);
  m.w = Matrix(3, 3);
  CHECK_THROWS_AS(m.validate(), ValidationError);
}
