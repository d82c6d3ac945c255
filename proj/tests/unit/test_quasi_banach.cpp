#include <cmath>

#include "doctest.h"
#include "stableinfer/errors.hpp"
#include "stableinfer/quasi_banach.hpp"
#include "stableinfer/rng.hpp"

using namespace stableinfer;

namespace {

// Random vectors with heavy-ish entries and occasional exact zeros.
struct VecGen {
  Stream s;
  explicit VecGen(std::uint64_t seed) : s(seed) {}
  std::vector<double> operator()(std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = (s.uniform01() < 0.1) ? 0.0 : s.normal() / std::max(0.05, s.uniform01());
    return v;
  }
  double q() { return 0.1 + 3.0 * s.uniform01(); }
};

WeightedSampleMeasure random_measure(Stream& s, std::size_t n, std::uint64_t ref = 1) {
  std::vector<double> w(n);
  for (double& x : w) x = std::exp(2.0 * s.normal());
  return WeightedSampleMeasure(ref, w);
}

}  // namespace

TEST_CASE("quasi-triangle constants and norms") {
  CHECK(quasi_triangle_constant(0.5) == doctest::Approx(2.0));
  CHECK(quasi_triangle_constant(0.25) == doctest::Approx(8.0));
  CHECK(quasi_triangle_constant(1.0) == 1.0);
  CHECK(quasi_triangle_constant(3.0) == 1.0);
  CHECK(quasi_triangle_constant(kInfinityNorm) == 1.0);
  const std::vector<double> v{3.0, -4.0};
  CHECK(quasi_norm(v, QuasiNormSpec::sequence(2.0)) == doctest::Approx(5.0));
  CHECK(quasi_norm(v, QuasiNormSpec::sequence(1.0)) == doctest::Approx(7.0));
  CHECK(quasi_norm(v, QuasiNormSpec::sequence(0.5)) == doctest::Approx(std::pow(std::sqrt(3.0) + 2.0, 2)));
  CHECK(quasi_norm(v, QuasiNormSpec::sequence(kInfinityNorm)) == 4.0);
  CHECK(quasi_norm(v, QuasiNormSpec::grid(2.0, 0.25)) == doctest::Approx(2.5));
  CHECK_THROWS_AS(quasi_norm(v, QuasiNormSpec::sequence(0.0)), OutOfRange);
}

TEST_CASE("property: quasi-norm homogeneity and the quasi-triangle inequality") {
  VecGen gen(404);
  for (int trial = 0; trial < 500; ++trial) {
    const double q = gen.q();
    const auto spec = trial % 2 ? QuasiNormSpec::sequence(q) : QuasiNormSpec::grid(q, 1.0 / 64);
    const std::size_t n = 1 + trial % 40;
    const auto a = gen(n), b = gen(n);
    std::vector<double> sum(n), scaled(n);
    const double c = gen.s.normal() * 3.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] = a[i] + b[i];
      scaled[i] = c * a[i];
    }
    const double na = quasi_norm(a, spec), nb = quasi_norm(b, spec);
    CHECK(quasi_norm(scaled, spec) == doctest::Approx(std::abs(c) * na).epsilon(1e-10));
    CHECK(quasi_norm(sum, spec) <= spec.triangle_constant() * (na + nb) * (1 + 1e-12));
  }
}

TEST_CASE("Hellinger and total variation against direct sums") {
  const WeightedSampleMeasure mu(7, {1.0, 2.0, 1.0, 0.0});
  const WeightedSampleMeasure nu(7, {2.0, 2.0, 2.0, 2.0});
  // Normalized: mu -> {1, 2, 1, 0}, nu -> 1 each.
  const double h = std::sqrt(((1 - 1) * (1 - 1) + std::pow(std::sqrt(2.0) - 1, 2) + 0 + 1) / 4.0);
  CHECK(hellinger_empirical(mu, nu) == doctest::Approx(h));
  CHECK(total_variation_empirical(mu, nu) == doctest::Approx(0.5 * (0 + 1 + 0 + 1) / 4.0));
  CHECK(mu.effective_sample_size() == doctest::Approx(16.0 / 6.0));
  CHECK(nu.effective_sample_size() == doctest::Approx(4.0));
  CHECK(mu.mean_weight() == 1.0);
  CHECK(mu.normalized(1) == 0.5);

  // Disjoint supports reach the maximum sqrt 2 and TV 1.
  const WeightedSampleMeasure a(1, {1.0, 0.0}), b(1, {0.0, 5.0});
  CHECK(hellinger_empirical(a, b) == doctest::Approx(std::sqrt(2.0)));
  CHECK(total_variation_empirical(a, b) == doctest::Approx(1.0));
  CHECK(hellinger_empirical(a, a) == 0.0);

  const WeightedSampleMeasure other(8, {1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(hellinger_empirical(mu, other), MismatchedReference);
  CHECK_THROWS_AS(total_variation_empirical(mu, other), MismatchedReference);
  CHECK_THROWS_AS(WeightedSampleMeasure(1, {1.0, -1.0}), DegenerateWeights);
}

TEST_CASE("log-weight construction cancels the shift") {
  const std::vector<double> lw{-1000.0, -1001.0, -1000.5};
  const auto m = WeightedSampleMeasure::from_log_weights(3, lw);
  CHECK(m.log_shift() == -1000.0);
  CHECK(m.weights()[0] == 1.0);
  std::vector<double> shifted(lw);
  for (double& x : shifted) x += 1000.0;
  const auto n = WeightedSampleMeasure::from_log_weights(3, shifted);
  for (std::size_t i = 0; i < 3; ++i) CHECK(m.normalized(i) == n.normalized(i));
  CHECK(hellinger_empirical(m, n) == 0.0);
}

TEST_CASE("property: Hellinger axioms, Kraft ordering and the expectation bound") {
  Stream s(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 50;
    const auto mu = random_measure(s, n), nu = random_measure(s, n);
    const double h = hellinger_empirical(mu, nu);
    CHECK(h == doctest::Approx(hellinger_empirical(nu, mu)).epsilon(1e-14));
    CHECK(h >= 0.0);
    CHECK(h <= std::sqrt(2.0) + 1e-12);
    CHECK(total_variation_empirical(mu, nu) <= h + 1e-12);
    CHECK(total_variation_empirical(mu, nu) >= 0.5 * h * h - 1e-12);
    std::vector<double> f(n);
    for (double& x : f) x = s.normal() * (1 + 4 * s.uniform01());
    const auto gap = expectation_gap_bound_check(f, mu, nu, 1e-12);
    CHECK(gap.holds);
    CHECK(gap.sup_holds);
    CHECK(gap.lhs == doctest::Approx(std::abs(weighted_mean(f, mu) - weighted_mean(f, nu))));
    // Triangle inequality through a third measure.
    const auto rho = random_measure(s, n);
    CHECK(h <= hellinger_empirical(mu, rho) + hellinger_empirical(rho, nu) + 1e-12);
  }
}

TEST_CASE("Hellinger standard error shrinks with sample size") {
  Stream s(5);
  double prev = 1e9;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    std::vector<double> w(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = s.normal();
      w[i] = std::exp(-0.5 * x * x);
      v[i] = std::exp(-0.5 * (x - 0.3) * (x - 0.3));
    }
    const auto d = hellinger_with_error(WeightedSampleMeasure(2, w), WeightedSampleMeasure(2, v));
    CHECK(d.value == doctest::Approx(hellinger_empirical(WeightedSampleMeasure(2, w), WeightedSampleMeasure(2, v))));
    CHECK(d.std_error > 0.0);
    CHECK(d.std_error < prev);
    prev = d.std_error;
  }
}
