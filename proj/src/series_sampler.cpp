#include "stableinfer/series_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "stableinfer/errors.hpp"
#include "stableinfer/hash.hpp"
#include "stableinfer/parallel.hpp"
#include "stableinfer/quasi_banach.hpp"
#include "stableinfer/rng.hpp"
#include "stableinfer/stats.hpp"

namespace stableinfer {
namespace {

constexpr double kOrderTie = 1e-12;

std::vector<std::size_t> doubling_depths(std::size_t depth) {
  std::vector<std::size_t> d;
  for (std::size_t n = 64; n < depth; n *= 2) d.push_back(n);
  d.push_back(depth);
  return d;
}

// Verdict from the asymptotic class of one series when the partial sums
// themselves are not clear-cut.
Summability class_verdict(int series, const PowerLogForm& form, double alpha, double q) {
  if (series == 0) {
    if (alpha >= 2.0)
      return form.amplitude == 0.0 || form.exponent > 0.0 ? Summability::summable
                                                           : Summability::not_summable;
    return lp_summable(form, alpha);
  }
  const double m = series == 1 ? q : 2.0 * q;
  if (alpha >= 2.0 || m < alpha - kOrderTie) return lp_summable(form, m);
  if (std::abs(m - alpha) <= kOrderTie) return orlicz_summable(form, alpha);
  return lp_summable(form, alpha);
}

SeriesVerdict per_series_verdict(const std::vector<double>& sums, int series, const FormFit& fit,
                                 double alpha, double q) {
  const std::size_t k = sums.size();
  std::vector<double> inc;
  for (std::size_t j = 1; j < k; ++j) inc.push_back(sums[j] - sums[j - 1]);
  if (inc.size() >= 3) {
    const std::size_t m = inc.size();
    bool small = true;
    for (std::size_t j = m - 3; j < m; ++j) small = small && std::abs(inc[j]) <= 1e-6;
    if (small) return SeriesVerdict::convergent;
    if (inc.size() >= 4) {
      bool contracting = true;
      for (std::size_t j = m - 3; j < m; ++j)
        contracting = contracting && inc[j - 1] > 0.0 && inc[j] / inc[j - 1] <= 0.9;
      if (contracting) return SeriesVerdict::convergent;
    }
  }
  if (k >= 4) {
    bool growing = true;
    for (std::size_t j = k - 3; j < k; ++j) growing = growing && sums[j] > 1.1 * sums[j - 1];
    if (growing) return SeriesVerdict::divergent;
  }
  if (fit.all_zero) return SeriesVerdict::convergent;
  if (!fit.reliable) return SeriesVerdict::inconclusive;
  switch (class_verdict(series, fit.form, alpha, q)) {
    case Summability::summable:
      return SeriesVerdict::convergent;
    case Summability::not_summable:
      return SeriesVerdict::divergent;
    case Summability::inconclusive:
      break;
  }
  return SeriesVerdict::inconclusive;
}

// Ratio a_n / b_n^power as a form (closed kinds) or a fit (otherwise).
FormFit ratio_form(const CoefficientSequence& a, const CoefficientSequence& b, double power,
                   std::size_t depth) {
  if (a.is_identically_zero()) {
    FormFit f;
    f.all_zero = true;
    return f;
  }
  const auto fa = a.closed_form();
  const auto fb = b.closed_form();
  if (fa && fb) return FormFit{fa->over(*fb, power), 0.0, false, true};
  return fit_power_log(
      [&](std::size_t n) {
        const double an = a.at(n);
        if (an == 0.0) return 0.0;
        const double bn = b.at(n);
        if (bn == 0.0) throw DivisionByZeroScale("zero denominator at n = " + std::to_string(n));
        return an / std::pow(std::abs(bn), power);
      },
      depth);
}

Summability verdict_of(const FormFit& f, double p) {
  if (f.all_zero) return Summability::summable;
  if (!f.reliable) return Summability::inconclusive;
  return lp_summable(f.form, p);
}

double grid_norm(std::span<const double> field, double q) {
  return quasi_norm(field, QuasiNormSpec::grid(q, 1.0 / static_cast<double>(field.size())));
}

}  // namespace

// --- spec -------------------------------------------------------------------

StableParams StableFieldSpec::coefficient_law(std::size_t n) const {
  try {
    return validate_params(alpha, beta.at(n), gamma.at(n), delta.at(n));
  } catch (const OutOfRange& e) {
    throw InvalidSpec("coefficient " + std::to_string(n) + ": " + e.what());
  }
}

void StableFieldSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidSpec("alpha must lie in (0, 2]");
  const std::size_t count = coefficient_count();
  if (count == 0) throw InvalidSpec("truncation must be >= 1");
  for (std::size_t n = 1; n <= count; ++n) coefficient_law(n);
  if (const auto* e = std::get_if<Eigenbasis>(&basis.kind)) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= count; ++n) {
      const double l = e->eigenvalues.at(n);
      if (!(l > 0.0) || !(l < prev))
        throw InvalidSpec("eigenvalues must be positive and strictly decreasing");
      prev = l;
    }
  }
  if (basis.is_wavelet() && basis.grid_size() == 0) throw InvalidSpec("grid size must be >= 1");
}

std::string StableFieldSpec::describe() const {
  std::string out = "alpha=" + format_double(alpha) + ";beta=" + stableinfer::describe(beta) +
                    ";gamma=" + stableinfer::describe(gamma) +
                    ";delta=" + stableinfer::describe(delta) + ";basis=" + basis.name();
  if (const auto* h = std::get_if<HaarWavelet>(&basis.kind))
    out += "(" + std::to_string(h->J) + "," + std::to_string(h->grid_size) + ")";
  if (const auto* h = std::get_if<HatHierarchical>(&basis.kind))
    out += "(" + std::to_string(h->J) + "," + std::to_string(h->grid_size) + ")";
  if (const auto* e = std::get_if<EuclideanSequence>(&basis.kind)) out += "(" + format_double(e->q) + ")";
  if (const auto* e = std::get_if<Eigenbasis>(&basis.kind))
    out += "(" + stableinfer::describe(e->eigenvalues) + "," + format_double(e->s) + "," +
           std::to_string(e->grid_size) + ")";
  out += basis.unit_norm ? ";unit" : ";raw";
  return out + ";N=" + std::to_string(coefficient_count());
}

std::uint64_t StableFieldSpec::hash() const { return fnv1a64(describe()); }

std::vector<double> FieldEnsemble::column(std::size_t n) const {
  std::vector<double> c(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) c[i] = coefficients[i * n_coeffs + n];
  return c;
}

FieldEnsemble sample_coefficients(const StableFieldSpec& spec, std::size_t n_samples,
                                  std::uint64_t seed) {
  spec.validate();
  FieldEnsemble e;
  e.spec_hash = spec.hash();
  e.seed = seed;
  e.n_samples = n_samples;
  e.n_coeffs = spec.coefficient_count();
  std::vector<StableParams> laws;
  laws.reserve(e.n_coeffs);
  for (std::size_t n = 1; n <= e.n_coeffs; ++n) laws.push_back(spec.coefficient_law(n));
  e.coefficients.resize(n_samples * e.n_coeffs);
  parallel_for(n_samples, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* row = e.coefficients.data() + i * e.n_coeffs;
      for (std::size_t n = 0; n < e.n_coeffs; ++n) {
        Stream s(stream_key(seed, i, n + 1));
        row[n] = sample_stable_one(laws[n], s);
      }
    }
  });
  if (spec.alpha < 2.0) {
    const auto report = summability_report(spec.gamma, spec.alpha, 1.0, 1024);
    if (report.verdict == SummabilityVerdict::fails_ell_alpha)
      e.warnings.push_back("gamma is not alpha-summable; the series need not converge");
  }
  return e;
}

void synthesize_ensemble(const BasisSpec& basis, FieldEnsemble& e) {
  if (basis.is_euclidean()) {
    e.grid_size = e.n_coeffs;
    e.grid = e.coefficients;
    return;
  }
  e.grid_size = basis.grid_size();
  e.grid.assign(e.n_samples * e.grid_size, 0.0);
  parallel_for(e.n_samples, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      synthesize_into(basis, e.sample(i), {e.grid.data() + i * e.grid_size, e.grid_size});
  });
}

// --- Figure 2 ----------------------------------------------------------------

const char* to_string(CoefficientFamily f) {
  return f == CoefficientFamily::cauchy ? "cauchy" : "gaussian";
}

double figure2_scale(unsigned j) {
  const double jp = static_cast<double>(j) + 1.0;
  return std::ldexp(1.0 / (jp * jp), -static_cast<int>(j));
}

std::pair<double, double> figure2_base_draws(std::uint64_t seed, std::size_t sample,
                                             std::size_t n) {
  Stream s(stream_key(seed, sample, n));
  const double x = s.normal();
  double z = s.normal();
  while (z == 0.0) z = s.normal();
  return {x, z};
}

Figure2Ensemble figure2_ensemble(CoefficientFamily family, unsigned J, std::size_t n_samples,
                                 std::uint64_t seed, BasisSpec basis) {
  if (J < 1) throw InvalidSpec("figure 2 ensembles need J >= 1");
  const std::size_t grid = basis.grid_size() ? basis.grid_size() : kDefaultGridSize;
  basis = std::holds_alternative<HatHierarchical>(basis.kind) ? BasisSpec::hat(J, grid)
                                                              : BasisSpec::haar(J, grid);
  Figure2Ensemble out;
  FieldEnsemble& e = out.ensemble;
  e.seed = seed;
  e.n_samples = n_samples;
  e.n_coeffs = basis.coefficient_count(0);
  e.spec_hash = fnv1a64(std::string("figure2;family=") + to_string(family) +
                        ";J=" + std::to_string(J) + ";basis=" + basis.name() +
                        ";grid=" + std::to_string(grid));
  e.coefficients.resize(n_samples * e.n_coeffs);
  parallel_for(n_samples, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t n = 1; n <= e.n_coeffs; ++n) {
        const auto [x, z] = figure2_base_draws(seed, i, n);
        const double scale = figure2_scale(wavelet_level(n).first);
        e.coefficients[i * e.n_coeffs + n - 1] =
            family == CoefficientFamily::cauchy ? scale * x / z : scale * x;
      }
    }
  });
  for (double c : e.coefficients) out.max_abs_coefficient = std::max(out.max_abs_coefficient, std::abs(c));
  synthesize_ensemble(basis, e);
  if (e.grid.empty()) return out;
  const auto [lo, hi] = std::minmax_element(e.grid.begin(), e.grid.end());
  out.raw_min = *lo;
  out.raw_max = *hi;
  const double range = out.raw_max - out.raw_min;
  for (double& v : e.grid) v = range > 0.0 ? (v - out.raw_min) / range : 0.0;
  return out;
}

// --- summability ------------------------------------------------------------------

const char* to_string(OrliczRegime r) {
  switch (r) {
    case OrliczRegime::alpha_eq_q:
      return "alpha_eq_q";
    case OrliczRegime::alpha_eq_2q:
      return "alpha_eq_2q";
    case OrliczRegime::neither:
      return "neither";
  }
  return "neither";
}

const char* to_string(SummabilityVerdict v) {
  switch (v) {
    case SummabilityVerdict::satisfies:
      return "Satisfies";
    case SummabilityVerdict::fails_ell_alpha:
      return "FailsEllAlpha";
    case SummabilityVerdict::fails_orlicz:
      return "FailsOrlicz";
    case SummabilityVerdict::inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

SummabilityReport summability_report(const CoefficientSequence& gamma, double alpha, double q,
                                     std::size_t probe_depth, bool force_numeric) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw OutOfRange("alpha", "must lie in (0, 2]");
  if (!(q > 0.0)) throw OutOfRange("q", "must be > 0");
  SummabilityReport r;
  if (std::abs(alpha - q) <= kOrderTie) {
    r.regime = OrliczRegime::alpha_eq_q;
  } else if (std::abs(alpha - 2.0 * q) <= kOrderTie) {
    r.regime = OrliczRegime::alpha_eq_2q;
  }
  r.depths = doubling_depths(std::max<std::size_t>(probe_depth, 64));
  long double ell = 0.0L;
  long double orl = 0.0L;
  std::size_t n = 1;
  for (std::size_t d : r.depths) {
    for (; n <= d; ++n) {
      const double g = std::abs(gamma.at(n));
      if (g == 0.0) continue;
      const double ga = std::pow(g, alpha);
      ell += ga;
      orl += std::abs(ga * std::log(g));
    }
    r.ell_alpha_sums.push_back(static_cast<double>(ell));
    r.orlicz_sums.push_back(static_cast<double>(orl));
  }
  FormFit fit;
  if (gamma.is_identically_zero()) {
    fit.all_zero = true;
  } else if (!force_numeric && gamma.closed_form()) {
    fit = FormFit{*gamma.closed_form(), 0.0, false, true};
    r.analytic = true;
  } else {
    fit = fit_power_log(gamma, r.depths.back());
  }
  r.tail = fit.form;
  r.fit_residual = fit.residual_rms;
  if (fit.all_zero) {
    r.ell_alpha = r.orlicz = Summability::summable;
  } else if (!fit.reliable) {
    r.ell_alpha = r.orlicz = Summability::inconclusive;
  } else {
    r.ell_alpha = lp_summable(fit.form, alpha);
    r.orlicz = orlicz_summable(fit.form, alpha);
  }
  if (r.ell_alpha == Summability::not_summable) {
    r.verdict = SummabilityVerdict::fails_ell_alpha;
  } else if (r.ell_alpha == Summability::inconclusive) {
    r.verdict = SummabilityVerdict::inconclusive;
  } else if (r.regime != OrliczRegime::neither && r.orlicz != Summability::summable) {
    r.verdict = r.orlicz == Summability::not_summable ? SummabilityVerdict::fails_orlicz
                                                      : SummabilityVerdict::inconclusive;
  } else {
    r.verdict = SummabilityVerdict::satisfies;
  }
  return r;
}

// --- three series ---------------------------------------------------------------

const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::convergent:
      return "Convergent";
    case SeriesVerdict::divergent:
      return "Divergent";
    case SeriesVerdict::inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

ThreeSeriesTerms three_series_terms(double gamma, double q, double A,
                                    const TruncatedMomentTable* table) {
  gamma = std::abs(gamma);
  if (gamma == 0.0) return {};
  if (table == nullptr) {
    const auto m = truncated_cauchy_moments(gamma, A);
    return {m.p_exceed, m.m1, m.m2};
  }
  const double b = std::pow(A, 1.0 / q) / gamma;
  return {table->exceed(b), std::pow(gamma, q) * table->moment(0, b),
          std::pow(gamma, 2.0 * q) * table->moment(1, b)};
}

ThreeSeriesResult three_series_check(const CoefficientSequence& gamma, double alpha, double q,
                                     double A, std::size_t depth, double beta) {
  if (!(A > 0.0)) throw OutOfRange("A", "must be > 0");
  if (!(q > 0.0)) throw OutOfRange("q", "must be > 0");
  validate_params(alpha, beta, 1.0, 0.0);
  ThreeSeriesResult r;
  r.note = "finite-depth numeric diagnostic, not a proof";
  std::unique_ptr<TruncatedMomentTable> table;
  if (!(alpha == 1.0 && beta == 0.0 && q == 1.0))
    table = std::make_unique<TruncatedMomentTable>(alpha, beta, std::vector<double>{q, 2.0 * q});
  r.depths = doubling_depths(std::max<std::size_t>(depth, 64));
  long double s[3] = {0.0L, 0.0L, 0.0L};
  std::size_t n = 1;
  for (std::size_t d : r.depths) {
    for (; n <= d; ++n) {
      const auto t = three_series_terms(gamma.at(n), q, A, table.get());
      s[0] += t.p_exceed;
      s[1] += t.m1;
      s[2] += t.m2;
    }
    r.partial_sums.push_back({static_cast<double>(s[0]), static_cast<double>(s[1]),
                              static_cast<double>(s[2])});
  }
  r.s0 = r.partial_sums.back()[0];
  r.s1 = r.partial_sums.back()[1];
  r.s2 = r.partial_sums.back()[2];
  const FormFit fit = analyse_tail(gamma, r.depths.back());
  bool any_divergent = false;
  bool all_convergent = true;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> sums;
    for (const auto& ps : r.partial_sums) sums.push_back(ps[static_cast<std::size_t>(k)]);
    r.per_series[static_cast<std::size_t>(k)] = per_series_verdict(sums, k, fit, alpha, q);
    any_divergent = any_divergent || r.per_series[static_cast<std::size_t>(k)] == SeriesVerdict::divergent;
    all_convergent = all_convergent && r.per_series[static_cast<std::size_t>(k)] == SeriesVerdict::convergent;
  }
  r.verdict = any_divergent    ? SeriesVerdict::divergent
              : all_convergent ? SeriesVerdict::convergent
                               : SeriesVerdict::inconclusive;
  return r;
}

// --- Hilbert scales and shifts ------------------------------------------------------

HilbertScaleVerdict hilbert_scale_membership(const CoefficientSequence& gamma,
                                             const CoefficientSequence& delta,
                                             const CoefficientSequence& lambda, double s,
                                             double alpha, std::size_t probe_depth) {
  const std::size_t check = std::min<std::size_t>(probe_depth, 4096);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= check; ++n) {
    const double l = lambda.at(n);
    if (!(l > 0.0) || !(l < prev))
      throw InvalidSpec("eigenvalues must be positive and strictly decreasing");
    prev = l;
  }
  HilbertScaleVerdict v;
  v.gamma_condition = verdict_of(ratio_form(gamma, lambda, s, probe_depth), alpha);
  v.delta_condition = verdict_of(ratio_form(delta, lambda, s, probe_depth), 2.0);
  v.member = v.gamma_condition == Summability::summable && v.delta_condition == Summability::summable;
  return v;
}

Summability cameron_martin_shift_admissible(const CoefficientSequence& h,
                                            const CoefficientSequence& gamma,
                                            std::size_t probe_depth) {
  if (h.is_identically_zero()) return Summability::summable;
  for (std::size_t n = 1; n <= probe_depth; ++n)
    if (h.at(n) != 0.0 && gamma.at(n) == 0.0)
      throw DivisionByZeroScale("shift is nonzero where the scale vanishes, n = " + std::to_string(n));
  return verdict_of(ratio_form(h, gamma, 1.0, probe_depth), 2.0);
}

// --- moments and frames --------------------------------------------------------------

double series_norm(const BasisSpec& basis, std::span<const double> c, double q, std::size_t m) {
  m = std::min(m, c.size());
  if (const auto* e = std::get_if<Eigenbasis>(&basis.kind)) {
    std::vector<double> w(m);
    for (std::size_t n = 1; n <= m; ++n) w[n - 1] = std::pow(e->eigenvalues.at(n), -e->s) * c[n - 1];
    return quasi_norm(w, QuasiNormSpec::sequence(q));
  }
  if (basis.is_euclidean()) return quasi_norm(c.first(m), QuasiNormSpec::sequence(q));
  std::vector<double> padded(c.begin(), c.end());
  std::fill(padded.begin() + static_cast<std::ptrdiff_t>(m), padded.end(), 0.0);
  return grid_norm(synthesize(basis, padded), q);
}

FlomResult flom_estimate(const FieldEnsemble& e, const StableFieldSpec& spec, double p, double q) {
  if (!(p > 0.0)) throw OutOfRange("p", "must be > 0");
  if (p > q) throw OutOfRange("p", "need p <= q");
  if (spec.alpha < 2.0 && p >= spec.alpha)
    throw MomentOrderTooHigh("p >= alpha: the moment E||u||^p is infinite");
  if (e.n_samples == 0) throw InvalidSpec("empty ensemble");
  const std::size_t N = e.n_coeffs;
  std::vector<std::size_t> cuts;
  for (std::size_t c : {N / 4, N / 2, N})
    if (c > 0 && (cuts.empty() || cuts.back() != c)) cuts.push_back(c);
  FlomResult out;
  std::vector<double> vals(e.n_samples);
  for (std::size_t cut : cuts) {
    parallel_for(e.n_samples, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i)
        vals[i] = std::pow(series_norm(spec.basis, e.sample(i), q, cut), p);
    });
    const auto est = mean_and_stderr(vals);
    out.trace.push_back({cut, est.mean, est.std_error});
  }
  out.estimate = out.trace.back().estimate;
  out.std_error = out.trace.back().std_error;
  return out;
}

QFrameCheck qframe_upper_check(const BasisSpec& basis, double q, std::size_t n_trials,
                               std::uint64_t seed, std::size_t truncation) {
  const std::size_t count = basis.coefficient_count(truncation);
  QFrameCheck out;
  const bool orthonormal =
      std::holds_alternative<HaarWavelet>(basis.kind) ||
      (std::holds_alternative<Eigenbasis>(basis.kind) && basis.unit_norm) || basis.is_euclidean();
  out.orthonormal_case = orthonormal && q == 2.0;
  std::vector<double> ratios(n_trials);
  parallel_for(n_trials, [&](std::size_t begin, std::size_t end) {
    std::vector<double> v(count);
    for (std::size_t t = begin; t < end; ++t) {
      Stream s(stream_key(seed, t, 0));
      for (double& x : v) x = s.normal();
      const double denom = quasi_norm(v, QuasiNormSpec::sequence(q));
      const double num = basis.is_euclidean() ? denom : grid_norm(synthesize(basis, v), q);
      ratios[t] = num / denom;
    }
  });
  for (double r : ratios) out.max_ratio = std::max(out.max_ratio, r);
  out.mean_ratio = n_trials ? deterministic_mean(ratios) : 0.0;
  out.holds = out.orthonormal_case ? out.max_ratio <= 1.0 + 1e-3 : std::isfinite(out.max_ratio);
  return out;
}

}  // namespace stableinfer
