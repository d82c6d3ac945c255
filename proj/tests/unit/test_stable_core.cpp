#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "stableinfer/errors.hpp"
#include "stableinfer/stable_core.hpp"
#include "stableinfer/stats.hpp"
#include "support/oracles.hpp"

using namespace stableinfer;

namespace {

// Hand-rolled generator for valid (alpha, beta, gamma, delta).
struct ParamGen {
  Stream s;
  explicit ParamGen(std::uint64_t seed) : s(stream_key(seed, 0xa1fa)) {}
  StableParams next() {
    const double alpha = s.uniform(0.3, 2.0);
    const double beta = s.uniform(-1.0, 1.0);
    const double gamma = std::exp(s.uniform(-2.0, 2.0));
    const double delta = s.uniform(-3.0, 3.0);
    return StableParams::make(alpha, beta, gamma, delta);
  }
};

}  // namespace

TEST_CASE("parameter validation names the offending parameter") {
  CHECK_THROWS_AS(validate_params(0.0, 0.0, 1.0, 0.0), OutOfRange);
  CHECK_THROWS_AS(validate_params(2.1, 0.0, 1.0, 0.0), OutOfRange);
  CHECK_THROWS_AS(validate_params(1.5, 1.2, 1.0, 0.0), OutOfRange);
  CHECK_THROWS_AS(validate_params(1.5, 0.0, -1.0, 0.0), OutOfRange);
  try {
    validate_params(1.5, 0.0, 1.0, std::nan(""));
    FAIL("expected OutOfRange");
  } catch (const OutOfRange& e) {
    CHECK(e.parameter() == "delta");
  }
  CHECK(StableParams::make(2.0, 0.7, 1.0, 0.0).beta() == 0.0);
  CHECK(StableParams::make(1.0 + 1e-10, 0.0, 1.0, 0.0).alpha() == 1.0);
  CHECK(StableParams::normal(0.0, 1.0).gamma() == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("characteristic function: closed cases and modulus") {
  const auto c = StableParams::cauchy(0.5, 2.0);
  for (double t : {-3.0, -0.1, 0.0, 0.4, 2.5}) {
    const auto v = char_fn(c, t);
    CHECK(v.real() == doctest::Approx(std::cos(0.5 * t) * std::exp(-2.0 * std::abs(t))).epsilon(1e-12));
    CHECK(v.imag() == doctest::Approx(std::sin(0.5 * t) * std::exp(-2.0 * std::abs(t))).epsilon(1e-12));
  }
  const auto n = StableParams::normal(0.0, 1.0);
  CHECK(std::abs(char_fn(n, 1.3)) == doctest::Approx(std::exp(-0.5 * 1.3 * 1.3)));
  // |phi(t)| = exp(-(gamma |t|)^alpha) for every law.
  ParamGen gen(7);
  for (int i = 0; i < 200; ++i) {
    const auto p = gen.next();
    const double t = 0.7;
    CHECK(std::abs(char_fn(p, t)) ==
          doctest::Approx(std::exp(-std::pow(p.gamma() * t, p.alpha()))).epsilon(1e-12));
    CHECK(char_fn(p, 0.0) == std::complex<double>(1.0, 0.0));
  }
}

TEST_CASE("Cauchy closed forms match independent formulas") {
  for (double x : {-50.0, -1.0, 0.0, 0.3, 7.0}) {
    CHECK(cauchy_pdf(1.0, 2.0, x) == doctest::Approx(oracle::cauchy_pdf(1.0, 2.0, x)).epsilon(1e-14));
    CHECK(cauchy_cdf(1.0, 2.0, x) == doctest::Approx(oracle::cauchy_cdf(1.0, 2.0, x)).epsilon(1e-14));
    CHECK(std::exp(cauchy_log_pdf(1.0, 2.0, x)) == doctest::Approx(cauchy_pdf(1.0, 2.0, x)).epsilon(1e-13));
  }
  CHECK(cauchy_pdf(0.0, 1.0, 0.0) == doctest::Approx(1.0 / std::numbers::pi));
}

TEST_CASE("Fourier-inversion density agrees with closed forms and integrates to the cdf") {
  // alpha numerically next to 1 and 2 goes through the general route.
  StableDensity nearly_cauchy(StableParams::make(1.0 + 1e-6, 0.0, 1.0, 0.0));
  for (double x : {0.0, 0.5, 2.0})
    CHECK(nearly_cauchy.pdf(x) == doctest::Approx(oracle::cauchy_pdf(0.0, 1.0, x)).epsilon(1e-4));
  StableDensity gauss(StableParams::normal(0.0, 1.0));
  CHECK(gauss.pdf(0.8) == doctest::Approx(oracle::normal_pdf(0.0, 1.0, 0.8)).epsilon(1e-12));

  StableDensity d(StableParams::make(1.5, 0.5, 1.0, 0.0));
  const double x = 0.7, h = 1e-4;
  CHECK(d.pdf(x) == doctest::Approx((d.cdf(x + h) - d.cdf(x - h)) / (2 * h)).epsilon(1e-5));
  const double mass = oracle::simpson([&](double t) { return d.pdf(t); }, -3.0, 3.0, 1e-9);
  CHECK(mass == doctest::Approx(d.cdf(3.0) - d.cdf(-3.0)).epsilon(1e-6));
  CHECK_THROWS_AS(StableDensity(StableParams::make(1.5, 0.0, 0.0, 0.0)).pdf(0.0), ZeroScale);
}

TEST_CASE("samplers: determinism, substreams and distribution") {
  const auto p = StableParams::make(1.3, 0.4, 1.0, 0.0);
  const RngStream rng{42, 0};
  const auto a = sample_stable(p, 5000, rng);
  const auto b = sample_stable(p, 5000, rng);
  CHECK(a == b);
  Stream s = rng.at(17);
  CHECK(sample_stable_one(p, s) == a[17]);

  // Cauchy via CMS against the analytic cdf.
  const auto c = sample_stable(StableParams::cauchy(0.0, 1.0), 20000, RngStream{3, 1});
  CHECK(ks_statistic(c, [](double x) { return oracle::cauchy_cdf(0.0, 1.0, x); }) <
        ks_critical_value(c.size(), 0.01));
  const auto r = sample_cauchy_via_ratio(2.0, 1.0, 20000, RngStream{4, 1});
  CHECK(ks_statistic(r, [](double x) { return oracle::cauchy_cdf(1.0, 2.0, x); }) <
        ks_critical_value(r.size(), 0.01));
  const auto g = sample_stable(StableParams::normal(1.0, 2.0), 20000, RngStream{5, 1});
  CHECK(ks_statistic(g, [](double x) { return normal_cdf((x - 1.0) / 2.0); }) <
        ks_critical_value(g.size(), 0.01));
  CHECK(cauchy_from_normals(2.0, 1.0, 3.0, -1.5) == doctest::Approx(1.0 - 4.0));
  CHECK(cauchy_from_angle(2.0, std::numbers::pi / 4) == doctest::Approx(2.0));
}

TEST_CASE("samples of a stable law against its numerical cdf") {
  const auto p = StableParams::make(0.8, -0.5, 1.5, 1.0);
  StableDensity d(p);
  const auto x = sample_stable(p, 2000, RngStream{11, 2});
  CHECK(ks_statistic(x, [&](double v) { return d.cdf(v); }) < ks_critical_value(x.size(), 0.01));
}

TEST_CASE("closure arithmetic") {
  const auto p = StableParams::make(1.5, 0.3, 2.0, 1.0);
  const auto q = affine_transform(p, -2.0, 0.5);
  CHECK(q.beta() == doctest::Approx(-0.3));
  CHECK(q.gamma() == doctest::Approx(4.0));
  CHECK(q.delta() == doctest::Approx(-1.5));
  CHECK_THROWS_AS(affine_transform(p, 0.0, 1.0), ZeroScale);
  CHECK_THROWS_AS(convolve(p, StableParams::cauchy(0.0, 1.0)), AlphaMismatch);
  const auto cc = convolve(StableParams::cauchy(1.0, 2.0), StableParams::cauchy(-3.0, 0.5));
  CHECK(cc.gamma() == doctest::Approx(2.5));
  CHECK(cc.delta() == doctest::Approx(-2.0));
  const auto nn = convolve(StableParams::normal(0.0, 3.0), StableParams::normal(1.0, 4.0));
  CHECK(nn.gamma() == doctest::Approx(5.0 / std::sqrt(2.0)));
  // Characteristic functions multiply under convolution.
  ParamGen gen(99);
  for (int i = 0; i < 100; ++i) {
    auto a = gen.next();
    auto b0 = gen.next();
    const auto b = StableParams::make(a.alpha(), b0.beta(), b0.gamma(), b0.delta());
    const auto ab = convolve(a, b);
    for (double t : {-1.1, 0.35, 2.0}) {
      const auto lhs = char_fn(ab, t);
      const auto rhs = char_fn(a, t) * char_fn(b, t);
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("fractional moments") {
  CHECK(fractional_moment(StableParams::cauchy(0.0, 1.0), 0.5).value() ==
        doctest::Approx(oracle::cauchy_abs_moment(1.0, 0.5)).epsilon(1e-7));
  CHECK(fractional_moment(StableParams::cauchy(0.0, 3.0), 0.3).value() ==
        doctest::Approx(oracle::cauchy_abs_moment(3.0, 0.3)).epsilon(1e-7));
  CHECK(fractional_moment(StableParams::normal(0.0, 2.0), 1.0).value() ==
        doctest::Approx(oracle::normal_abs_moment(2.0, 1.0)).epsilon(1e-8));
  CHECK(fractional_moment(StableParams::normal(0.0, 1.0), 3.5).value() ==
        doctest::Approx(oracle::normal_abs_moment(1.0, 3.5)).epsilon(1e-8));
  CHECK(fractional_moment(StableParams::cauchy(0.0, 1.0), 1.0).is_infinite());
  CHECK(fractional_moment(StableParams::make(1.5, 0.0, 1.0, 0.0), 1.5).is_infinite());
  CHECK_THROWS_AS(fractional_moment(StableParams::cauchy(0.0, 1.0), 1.0).value(), NumericError);
  CHECK_THROWS_AS(fractional_moment(StableParams::cauchy(0.0, 1.0), 0.0), OutOfRange);

  // The general route against direct integration of the numerical density.
  const auto p = StableParams::make(1.5, 0.5, 1.0, 0.0);
  const double cf = fractional_moment(p, 0.5).value();
  StableDensity d(p);
  const double body = oracle::simpson([&](double x) { return std::sqrt(std::abs(x)) * d.pdf(x); }, -60.0, 60.0, 1e-8);
  // Tail beyond 60 from the power law: 2 c x^-alpha (1 +- beta) split, integrated.
  const double c = tail_constant(1.5);
  const double tail = c * 1.5 * 2.0 * std::pow(60.0, 0.5 - 1.5) / (1.5 - 0.5);
  CHECK(cf == doctest::Approx(body + tail).epsilon(2e-3));
  // Scaling: E|gamma u|^p = gamma^p E|u|^p for centred symmetric laws.
  const auto s1 = StableParams::make(1.2, 0.0, 1.0, 0.0);
  const auto s2 = StableParams::make(1.2, 0.0, 2.0, 0.0);
  CHECK(fractional_moment(s2, 0.6).value() / fractional_moment(s1, 0.6).value() ==
        doctest::Approx(std::pow(2.0, 0.6)).epsilon(1e-6));
}

TEST_CASE("tail constants") {
  CHECK(tail_constant(1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-6));
  const double oracle15 = std::tgamma(1.5) * std::sin(std::numbers::pi * 0.75) / std::numbers::pi;
  CHECK(tail_constant(1.5) == doctest::Approx(oracle15).epsilon(2e-3));
  CHECK_THROWS_AS(tail_constant(2.0), OutOfRange);
  const auto t = tail_asymptote(StableParams::cauchy(0.0, 1.0), 1e4);
  CHECK(t.survival == doctest::Approx(1.0 - oracle::cauchy_cdf(0.0, 1.0, 1e4)).epsilon(1e-6));
}

TEST_CASE("truncated Cauchy moments against quadrature") {
  for (double g : {0.5, 1.0, 2.0, 4.0})
    for (double A : {0.5, 1.0, 3.0, 10.0}) {
      const auto m = truncated_cauchy_moments(g, A);
      const auto o = oracle::truncated_cauchy_by_quadrature(g, A);
      CHECK(std::abs(m.p_exceed - o.p_exceed) < 1e-10);
      CHECK(std::abs(m.m1 - o.m1) < 1e-10);
      CHECK(std::abs(m.m2 - o.m2) < 1e-9 * std::max(1.0, o.m2));
    }
  const auto one = truncated_cauchy_moments(1.0, 1.0);
  CHECK(one.p_exceed == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.m1 == doctest::Approx(std::log(2.0) / std::numbers::pi).epsilon(1e-15));
  CHECK(one.m2 == doctest::Approx(2.0 / std::numbers::pi - 0.5).epsilon(1e-15));
  const auto atom = truncated_cauchy_moments(0.0, 1.0);
  CHECK(atom.p_exceed == 0.0);
  CHECK(atom.m1 == 0.0);
  CHECK_THROWS_AS(truncated_cauchy_moments(1.0, 0.0), OutOfRange);
}

TEST_CASE("truncated moment table reproduces the Cauchy closed forms") {
  TruncatedMomentTable t(1.0, 0.0, {1.0, 2.0});
  for (double b : {0.3, 1.0, 5.0, 50.0}) {
    const auto m = truncated_cauchy_moments(1.0, b);
    CHECK(t.exceed(b) == doctest::Approx(m.p_exceed).epsilon(1e-4));
    CHECK(t.moment(0, b) == doctest::Approx(m.m1).epsilon(1e-4));
    CHECK(t.moment(1, b) == doctest::Approx(m.m2).epsilon(1e-3));
  }
}

TEST_CASE("KL divergence between normal and Cauchy") {
  const auto kl = kl_divergence_1d(normal_density(0.0, 1.0), cauchy_density(0.0, 1.0));
  REQUIRE(kl.is_finite());
  CHECK(kl.value() == doctest::Approx(oracle::kl_normal_cauchy()).epsilon(1e-6));
  CHECK(std::abs(kl.value() - 0.2592) < 1e-3);
  CHECK(kl_divergence_1d(cauchy_density(0.0, 1.0), normal_density(0.0, 1.0)).is_infinite());
  // Same-family divergence is zero.
  CHECK(kl_divergence_1d(normal_density(1.0, 2.0), normal_density(1.0, 2.0)).value() ==
        doctest::Approx(0.0));
}
