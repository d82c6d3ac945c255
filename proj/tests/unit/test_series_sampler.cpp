#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stableinfer/basis.hpp"
#include "stableinfer/ensemble_io.hpp"
#include "stableinfer/errors.hpp"
#include "stableinfer/sequences.hpp"
#include "stableinfer/series_sampler.hpp"
#include "stableinfer/stats.hpp"
#include "support/oracles.hpp"

using namespace stableinfer;

TEST_CASE("coefficient sequences") {
  const auto p = CoefficientSequence::power_law(2.0, 1.5);
  CHECK(p.at(4) == doctest::Approx(2.0 / 8.0));
  CHECK_THROWS_AS(p.at(0), OutOfRange);
  const auto pl = CoefficientSequence::power_log(1.0, 1.0, 2.0);
  CHECK(pl.at(1) == 0.0);
  CHECK(pl.at(10) == doctest::Approx(0.1 / std::pow(std::log(10.0), 2)));
  const auto e = CoefficientSequence::explicit_values({3.0, 4.0}, {TailRule::Kind::power_law, 5.0, 2.0});
  CHECK(e.at(2) == 4.0);
  CHECK(e.at(5) == doctest::Approx(0.2));
  CHECK(CoefficientSequence::zero().is_identically_zero());
  CHECK(CoefficientSequence::constant(0.0).is_identically_zero());
  CHECK_FALSE(CoefficientSequence::constant(1.0).is_identically_zero());
  CHECK(scaled(p, 3.0).at(4) == doctest::Approx(0.75));
  CHECK(describe(p) == "power_law(2,1.5)");
  CHECK(e.max_abs(10) == 4.0);
}

TEST_CASE("summability by the integral test") {
  CHECK(lp_summable({1, 2, 0}, 1.0) == Summability::summable);
  CHECK(lp_summable({1, 1, 0}, 1.0) == Summability::not_summable);
  CHECK(lp_summable({1, 1, 2}, 1.0) == Summability::summable);
  CHECK(lp_summable({1, 1, 1}, 1.0) == Summability::not_summable);
  CHECK(lp_summable({1, 0.5, 0}, 1.0) == Summability::not_summable);
  CHECK(lp_summable({0, 0, 0}, 1.0) == Summability::summable);
  // |a^alpha log a| costs one power of log n.
  CHECK(orlicz_summable({1, 1, 2}, 1.0) == Summability::not_summable);
  CHECK(orlicz_summable({1, 1, 3}, 1.0) == Summability::summable);
  CHECK(orlicz_summable({1, 0, 0}, 1.0) == Summability::not_summable);
  CHECK(orlicz_summable({1, 2, 0}, 1.0) == Summability::summable);
}

TEST_CASE("power-log fits recover the exponents") {
  for (double r : {0.5, 1.0, 2.0})
    for (double s : {0.0, 1.0, 2.0}) {
      const auto seq = CoefficientSequence::power_log(1.7, r, s);
      const auto f = fit_power_log([&](std::size_t n) { return seq.at(n); }, 1 << 16);
      REQUIRE(f.reliable);
      CHECK(f.form.exponent == doctest::Approx(r).epsilon(1e-6));
      CHECK(f.form.log_exponent == doctest::Approx(s).epsilon(1e-4));
    }
  const auto z = fit_power_log(CoefficientSequence::zero(), 1024);
  CHECK(z.all_zero);
  // Oscillating entries are not a power law.
  const auto bad = fit_power_log([](std::size_t n) { return n % 2 ? 1.0 : 1e-6; }, 4096);
  CHECK_FALSE(bad.reliable);
}

TEST_CASE("summability reports: analytic and numeric agree") {
  for (double r : {0.25, 0.5, 1.0, 1.5, 2.0})
    for (double s : {0.0, 2.0}) {
      const auto g = CoefficientSequence::power_log(1.0, r, s);
      const auto a = summability_report(g, 1.0, 1.0, 1 << 14);
      const auto n = summability_report(g, 1.0, 1.0, 1 << 14, true);
      CHECK(a.analytic);
      CHECK_FALSE(n.analytic);
      CHECK(a.verdict == n.verdict);
    }
  CHECK(summability_report(CoefficientSequence::power_law(1, 2), 1.0, 1.0, 4096).verdict ==
        SummabilityVerdict::satisfies);
  CHECK(summability_report(CoefficientSequence::power_law(1, 1), 1.0, 1.0, 4096).verdict ==
        SummabilityVerdict::fails_ell_alpha);
  const auto orl = summability_report(CoefficientSequence::power_log(1, 1, 2), 1.0, 1.0, 4096);
  CHECK(orl.regime == OrliczRegime::alpha_eq_q);
  CHECK(orl.verdict == SummabilityVerdict::fails_orlicz);
  // Away from alpha = q, 2q the Orlicz condition is not required.
  CHECK(summability_report(CoefficientSequence::power_log(1, 1, 2), 1.0, 3.0, 4096).verdict ==
        SummabilityVerdict::satisfies);
  CHECK(std::string(to_string(SummabilityVerdict::satisfies)) == "Satisfies");
}

TEST_CASE("basis synthesis") {
  const auto haar = BasisSpec::haar(3, 64);
  CHECK(haar.coefficient_count(0) == 15);
  CHECK(wavelet_index(2, 1) == 5);
  CHECK(wavelet_level(5) == std::pair<unsigned, std::size_t>{2, 1});
  const auto grid = midpoint_grid(64);
  for (std::size_t n = 1; n <= 15; ++n) {
    const auto [j, k] = wavelet_level(n);
    for (double x : {grid[3], grid[20], grid[40], grid[63]})
      CHECK(basis_function(haar, n, x) == doctest::Approx(oracle::haar(j, k, x)));
  }
  // Synthesis against a direct sum of basis functions.
  std::vector<double> c(15);
  Stream s(8);
  for (double& v : c) v = s.normal();
  const auto f = synthesize(haar, c);
  REQUIRE(f.size() == 64);
  for (std::size_t i : {0u, 17u, 63u}) {
    double direct = 0.0;
    for (std::size_t n = 1; n <= 15; ++n) direct += c[n - 1] * basis_function(haar, n, grid[i]);
    CHECK(f[i] == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK_THROWS_AS(synthesize(haar, std::vector<double>(14)), DimensionMismatch);
  // Haar functions are orthonormal on the grid.
  double ip = 0.0, nn = 0.0;
  for (double x : grid) {
    ip += basis_function(haar, 2, x) * basis_function(haar, 3, x) / 64.0;
    nn += basis_function(haar, 6, x) * basis_function(haar, 6, x) / 64.0;
  }
  CHECK(ip == doctest::Approx(0.0));
  CHECK(nn == doctest::Approx(1.0));

  const auto eig = BasisSpec::eigen(CoefficientSequence::power_law(1.0, 2.0), 0.0, 256);
  std::vector<double> e{0.0, 1.0, 0.5};
  const auto fe = synthesize(eig, e);
  const auto eg = midpoint_grid(256);
  for (std::size_t i : {5u, 100u})
    CHECK(fe[i] == doctest::Approx(std::sqrt(2.0) * (std::sin(2 * M_PI * eg[i]) + 0.5 * std::sin(3 * M_PI * eg[i]))).epsilon(1e-10));
  const auto hat = BasisSpec::hat(2, 128);
  double hn = 0.0;
  for (double x : midpoint_grid(128)) hn += std::pow(basis_function(hat, 1, x), 2) / 128.0;
  CHECK(hn == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("field sampling is deterministic and per-coefficient keyed") {
  StableFieldSpec spec;
  spec.alpha = 1.5;
  spec.gamma = CoefficientSequence::power_law(1.0, 1.0);
  spec.truncation = 16;
  const auto a = sample_coefficients(spec, 200, 77);
  const auto b = sample_coefficients(spec, 200, 77);
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.n_coeffs == 16);
  CHECK(a.spec_hash == spec.hash());
  // Fewer samples: identical prefix.
  const auto c = sample_coefficients(spec, 50, 77);
  for (std::size_t i = 0; i < 50 * 16; ++i) CHECK(c.coefficients[i] == a.coefficients[i]);
  CHECK(sample_coefficients(spec, 10, 78).coefficients != c.coefficients);
  // gamma_n ~ 1/n fails the l^alpha condition only for alpha <= 1.
  CHECK(a.warnings.empty());
  spec.alpha = 1.0;
  CHECK_FALSE(sample_coefficients(spec, 2, 1).warnings.empty());

  spec.basis = BasisSpec::haar(3, 32);
  auto w = sample_coefficients(spec, 5, 3);
  CHECK(w.n_coeffs == 15);
  synthesize_ensemble(spec.basis, w);
  CHECK(w.grid.size() == 5 * 32);
  const auto direct = synthesize(spec.basis, w.sample(2));
  for (std::size_t i = 0; i < 32; ++i) CHECK(w.field(2)[i] == direct[i]);

  StableFieldSpec bad;
  bad.alpha = 2.5;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
}

TEST_CASE("coefficient marginals follow their stable laws") {
  StableFieldSpec spec;
  spec.alpha = 1.0;
  spec.gamma = CoefficientSequence::explicit_values({1.0, 0.5, 2.0});
  spec.delta = CoefficientSequence::explicit_values({0.0, 1.0, -1.0});
  spec.truncation = 3;
  const auto e = sample_coefficients(spec, 20000, 5);
  const double g[3] = {1.0, 0.5, 2.0}, d[3] = {0.0, 1.0, -1.0};
  for (std::size_t n = 0; n < 3; ++n) {
    const auto col = e.column(n);
    CHECK(ks_statistic(col, [&](double x) { return oracle::cauchy_cdf(d[n], g[n], x); }) <
          ks_critical_value(col.size()));
  }
}

TEST_CASE("figure 2 ensembles") {
  const auto c = figure2_ensemble(CoefficientFamily::cauchy, 4, 5, 11, BasisSpec::haar(4, 64));
  const auto g = figure2_ensemble(CoefficientFamily::gaussian, 4, 5, 11, BasisSpec::haar(4, 64));
  CHECK(c.ensemble.n_coeffs == 31);
  // Shared base normals: Gaussian coefficient = scale x, Cauchy = scale x / z.
  for (std::size_t n = 1; n <= 31; ++n) {
    const auto [x, z] = figure2_base_draws(11, 3, n);
    const double scale = figure2_scale(wavelet_level(n).first);
    CHECK(g.ensemble.sample(3)[n - 1] == doctest::Approx(scale * x));
    CHECK(c.ensemble.sample(3)[n - 1] == doctest::Approx(scale * x / z));
  }
  CHECK(figure2_scale(0) == 1.0);
  CHECK(figure2_scale(2) == doctest::Approx(1.0 / 36.0));
  const auto [lo, hi] = std::minmax_element(c.ensemble.grid.begin(), c.ensemble.grid.end());
  CHECK(*lo == 0.0);
  CHECK(*hi == 1.0);
}

TEST_CASE("three-series verdicts") {
  for (double r : {1.5, 2.0, 3.0})
    CHECK(three_series_check(CoefficientSequence::power_law(1, r), 1.0, 1.0, 1.0, 1 << 16).verdict ==
          SeriesVerdict::convergent);
  for (double r : {0.5, 1.0})
    CHECK(three_series_check(CoefficientSequence::power_law(1, r), 1.0, 1.0, 1.0, 1 << 16).verdict ==
          SeriesVerdict::divergent);
  const auto sharp = three_series_check(CoefficientSequence::power_log(1, 1, 2), 1.0, 1.0, 1.0, 1 << 16);
  CHECK(sharp.verdict == SeriesVerdict::divergent);
  CHECK(sharp.per_series[0] == SeriesVerdict::convergent);
  CHECK(sharp.per_series[1] == SeriesVerdict::divergent);
  CHECK(three_series_check(CoefficientSequence::zero(), 1.0, 1.0, 1.0, 1024).verdict ==
        SeriesVerdict::convergent);
  const auto t = three_series_terms(1.0, 1.0, 1.0, nullptr);
  CHECK(t.p_exceed == doctest::Approx(0.5));
  // Partial sums are non-decreasing.
  const auto ps = three_series_check(CoefficientSequence::power_law(1, 0.5), 1.0, 1.0, 1.0, 4096);
  for (std::size_t k = 1; k < ps.partial_sums.size(); ++k)
    for (int s = 0; s < 3; ++s) CHECK(ps.partial_sums[k][s] >= ps.partial_sums[k - 1][s]);
  // A non-Cauchy index uses the tabulated moments.
  CHECK(three_series_check(CoefficientSequence::power_law(1, 2), 1.5, 1.0, 1.0, 4096).verdict ==
        SeriesVerdict::convergent);
}

TEST_CASE("Hilbert scales and Cameron-Martin shifts") {
  const auto lambda = CoefficientSequence::power_law(1.0, 2.0);
  const auto v = hilbert_scale_membership(CoefficientSequence::power_law(1, 3), CoefficientSequence::zero(),
                                          lambda, 0.5, 1.0, 4096);
  CHECK(v.gamma_condition == Summability::summable);  // n^-3 / n^-1 = n^-2
  CHECK(v.member);
  const auto w = hilbert_scale_membership(CoefficientSequence::power_law(1, 3), CoefficientSequence::zero(),
                                          lambda, 1.0, 1.0, 4096);
  CHECK(w.gamma_condition == Summability::not_summable);  // n^-1
  CHECK_THROWS_AS(hilbert_scale_membership(CoefficientSequence::power_law(1, 1), CoefficientSequence::zero(),
                                           CoefficientSequence::power_law(1, -1), 0.5, 1.0, 64),
                  InvalidSpec);
  CHECK(cameron_martin_shift_admissible(CoefficientSequence::power_law(1, 2), CoefficientSequence::power_law(1, 1), 4096) ==
        Summability::summable);
  CHECK(cameron_martin_shift_admissible(CoefficientSequence::power_law(1, 1), CoefficientSequence::power_law(1, 1), 4096) ==
        Summability::not_summable);
  CHECK_THROWS_AS(cameron_martin_shift_admissible(CoefficientSequence::constant(1.0),
                                                  CoefficientSequence::explicit_values({1.0}), 8),
                  DivisionByZeroScale);
}

TEST_CASE("fractional moments of fields and the q-frame bound") {
  StableFieldSpec spec;
  spec.alpha = 1.0;
  spec.gamma = CoefficientSequence::power_law(1.0, 2.0);
  spec.truncation = 64;
  spec.basis = BasisSpec::euclidean(1.0);
  const auto e = sample_coefficients(spec, 20000, 1);
  const auto f = flom_estimate(e, spec, 0.5, 1.0);
  REQUIRE(f.trace.size() == 3);
  CHECK(f.trace[0].truncation == 16);
  CHECK(f.trace.back().estimate == f.estimate);
  CHECK(f.trace[0].estimate <= f.trace[2].estimate);
  CHECK_THROWS_AS(flom_estimate(e, spec, 1.0, 1.0), MomentOrderTooHigh);
  CHECK_THROWS_AS(flom_estimate(e, spec, 0.5, 0.25), OutOfRange);
  // Single coefficient: E|u_1|^p for a standard Cauchy.
  StableFieldSpec one = spec;
  one.truncation = 1;
  const auto e1 = sample_coefficients(one, 200000, 2);
  const auto f1 = flom_estimate(e1, one, 0.5, 1.0);
  CHECK(std::abs(f1.estimate - oracle::cauchy_abs_moment(1.0, 0.5)) < 4.0 * f1.std_error);

  const auto q = qframe_upper_check(BasisSpec::haar(4, 64), 2.0, 50, 5);
  CHECK(q.orthonormal_case);
  CHECK(q.holds);
  CHECK(q.max_ratio <= 1.0 + 1e-9);
  CHECK(series_norm(BasisSpec::euclidean(1.0), std::vector<double>{1, -2, 3}, 1.0, 2) == doctest::Approx(3.0));
}

TEST_CASE("SFE1 and CSV output") {
  StableFieldSpec spec;
  spec.basis = BasisSpec::haar(2, 16);
  auto e = sample_coefficients(spec, 4, 9);
  synthesize_ensemble(spec.basis, e);
  std::stringstream buf;
  write_sfe1(buf, e);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "SFE1");
  CHECK(bytes.size() == 4 + 5 * 8 + (4 * 7 + 4 * 16) * 8);
  // Little-endian seed at offset 12.
  CHECK(static_cast<unsigned char>(bytes[12]) == 9);
  const auto back = read_sfe1(buf);
  CHECK(back.coefficients == e.coefficients);
  CHECK(back.grid == e.grid);
  CHECK(back.spec_hash == e.spec_hash);
  std::stringstream junk("XXXX");
  CHECK_THROWS_AS(read_sfe1(junk), IoFailure);

  const auto dir = std::filesystem::temp_directory_path() / "stableinfer_io_test";
  std::filesystem::create_directories(dir);
  write_ensemble_csv(dir / "c.csv", e, CsvContent::coefficients, 0x1234);
  std::ifstream in(dir / "c.csv");
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "# config_hash=0000000000001234,seed=9");
  CHECK(l2.rfind("sample,c1,c2", 0) == 0);
  CHECK(l3.rfind("0,", 0) == 0);
  CHECK(std::stod(l3.substr(2, l3.find(',', 2) - 2)) == e.sample(0)[0]);
  CHECK_THROWS_AS(write_sfe1(dir / "missing" / "x.sfe1", e), IoFailure);
}
