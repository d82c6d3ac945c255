#include "stableinfer/bayes_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "stableinfer/ensemble_io.hpp"
#include "stableinfer/errors.hpp"
#include "stableinfer/hash.hpp"
#include "stableinfer/parallel.hpp"
#include "stableinfer/rng.hpp"

namespace stableinfer {
namespace {

constexpr double kMinEss = 10.0;
constexpr double kUnstableJump = 0.2;
constexpr std::size_t kMinPrefix = 1000;
constexpr int kMaxHalvings = 6;
constexpr double kRoundoff = 1e-12;

double log_plus(double t) { return t > 1.0 ? std::log(t) : 0.0; }

std::span<const double> input_of(const PotentialSpec& p, const FieldEnsemble& e, std::size_t i) {
  return p.on_grid ? e.field(i) : e.sample(i);
}

std::size_t input_width(const PotentialSpec& p, const FieldEnsemble& e) {
  if (p.on_grid && e.grid.size() != e.n_samples * e.grid_size)
    throw DimensionMismatch("potential reads grid fields but the ensemble has none");
  return p.on_grid ? e.grid_size : e.n_coeffs;
}

template <class F>
std::vector<double> per_sample(std::size_t n, F f) {
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = f(i);
  });
  return out;
}

std::vector<double> shifted(std::span<const double> y, std::span<const double> dir, double eps) {
  std::vector<double> out(y.begin(), y.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += eps * dir[i];
  return out;
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Indicator probes for the expectation bound: first coordinate positive,
// norm at most 1, norm above 3.
std::vector<std::vector<double>> indicator_probes(const PotentialSpec& p, const FieldEnsemble& e,
                                                  std::span<const double> norms) {
  const std::size_t n = e.n_samples;
  std::vector<std::vector<double>> f(3, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = input_of(p, e, i);
    f[0][i] = !u.empty() && u[0] > 0.0 ? 1.0 : 0.0;
    f[1][i] = norms[i] <= 1.0 ? 1.0 : 0.0;
    f[2][i] = norms[i] > 3.0 ? 1.0 : 0.0;
  }
  return f;
}

SweepPoint compare(const PosteriorEstimate& a, const PosteriorEstimate& b,
                   const std::vector<std::vector<double>>& probes) {
  SweepPoint pt;
  pt.hellinger = hellinger_with_error(a.measure, b.measure);
  pt.total_variation = total_variation_empirical(a.measure, b.measure);
  pt.kraft_holds = pt.total_variation <= pt.hellinger.value + kRoundoff &&
                   pt.hellinger.value <= std::sqrt(2.0) + kRoundoff;
  pt.gap_holds = true;
  for (const auto& f : probes)
    pt.gap_holds = pt.gap_holds && expectation_gap_bound_check(f, a.measure, b.measure, kRoundoff).holds;
  return pt;
}

void finish_report(WellPosednessReport& rep) {
  std::vector<double> lx, ly;
  bool kraft = true, gap = true;
  for (const auto& pt : rep.points) {
    kraft = kraft && pt.kraft_holds;
    gap = gap && pt.gap_holds;
    if (pt.perturbation > 0.0 && pt.hellinger.value > 0.0) {
      lx.push_back(std::log(pt.perturbation));
      ly.push_back(std::log(pt.hellinger.value));
    }
  }
  rep.verdicts["kraft_ordering"] = kraft ? "holds" : "violated";
  rep.verdicts["expectation_bound"] = gap ? "holds" : "violated";
  bool all_zero = true;
  for (const auto& pt : rep.points) all_zero = all_zero && pt.hellinger.value == 0.0;
  if (all_zero) {
    rep.verdicts["rate"] = "zero_distance";
  } else if (lx.size() >= 2) {
    rep.fit = fit_line(lx, ly);
    // d_H <= C * perturbation forces an asymptotic slope of at least one.
    rep.verdicts["rate"] = rep.fit->slope >= 0.9 ? "consistent_linear" : "sublinear";
  } else {
    rep.verdicts["rate"] = "insufficient_points";
  }
  if (rep.integrability)
    rep.verdicts["integrability"] = rep.integrability->divergence_flag ? "unstable" : "stable";
}

}  // namespace

// --- forward maps and the Gaussian potential ------------------------------------

ForwardMap ForwardMap::identity() { return {}; }

ForwardMap ForwardMap::linear(std::size_t rows, std::size_t cols, std::vector<double> matrix) {
  if (matrix.size() != rows * cols) throw DimensionMismatch("matrix must hold rows * cols entries");
  ForwardMap m;
  m.kind = Kind::linear;
  m.rows = rows;
  m.cols = cols;
  m.matrix = std::move(matrix);
  return m;
}

ForwardMap ForwardMap::componentwise(double kappa, double c_plus, double c_minus) {
  if (!(kappa >= 0.0) || !(c_plus >= 0.0) || !(c_minus >= 0.0))
    throw OutOfRange("forward", "kappa, c+ and c- must be >= 0");
  ForwardMap m;
  m.kind = Kind::componentwise;
  m.kappa = kappa;
  m.c_plus = c_plus;
  m.c_minus = c_minus;
  return m;
}

std::vector<double> ForwardMap::apply(std::span<const double> u) const {
  switch (kind) {
    case Kind::identity:
      return {u.begin(), u.end()};
    case Kind::linear: {
      if (u.size() != cols) throw DimensionMismatch("forward map expects " + std::to_string(cols) + " inputs");
      std::vector<double> out(rows, 0.0);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i] += matrix[i * cols + j] * u[j];
      return out;
    }
    case Kind::componentwise: {
      std::vector<double> out(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = std::copysign(c_plus * std::pow(std::abs(u[i]), kappa), u[i]);
      return out;
    }
  }
  return {};
}

double ForwardMap::upper_growth(double t, std::size_t n) const {
  switch (kind) {
    case Kind::identity:
      return t;
    case Kind::linear: {
      double f = 0.0;
      for (double a : matrix) f += a * a;
      return std::sqrt(f) * t;
    }
    case Kind::componentwise: {
      // sum |u_i|^(2 kappa) <= n^(1 - kappa) ||u||^(2 kappa) for kappa < 1 (Hoelder).
      const double spread = kappa < 1.0 ? std::pow(double(std::max<std::size_t>(n, 1)), 0.5 * (1.0 - kappa)) : 1.0;
      return c_plus * spread * std::pow(t, kappa);
    }
  }
  return 0.0;
}

double GaussianAdditivePotential::sigma_minus() const {
  return 1.0 / *std::max_element(noise_variance.begin(), noise_variance.end());
}

double GaussianAdditivePotential::sigma_plus() const {
  return 1.0 / *std::min_element(noise_variance.begin(), noise_variance.end());
}

void GaussianAdditivePotential::validate() const {
  if (noise_variance.empty()) throw InvalidSpec("noise covariance must have at least one entry");
  for (double s : noise_variance)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidSpec("noise variances must be finite and > 0");
  if (forward.kind == ForwardMap::Kind::linear && forward.rows != noise_variance.size())
    throw InvalidSpec("forward map rows must match the noise dimension");
  if (envelopes == Envelopes::growth && forward.kind != ForwardMap::Kind::componentwise)
    throw InvalidSpec("growth envelopes need a componentwise forward map");
}

PotentialSpec GaussianAdditivePotential::spec() const {
  validate();
  PotentialSpec p;
  const ForwardMap G = forward;
  const std::vector<double> s = noise_variance;
  const std::size_t dy = s.size();
  const double sm = sigma_minus();
  const double sp = sigma_plus();
  p.data_dim = dy;
  p.input_dim = forward.kind == ForwardMap::Kind::linear ? forward.cols : dy;
  const std::size_t du = p.input_dim;
  p.misfit = [G, s](std::span<const double> u, std::span<const double> y) {
    const auto g = G.apply(u);
    if (g.size() != y.size() || y.size() != s.size())
      throw DimensionMismatch("data, forward output and covariance dimensions differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - g[i];
      acc += d * d / s[i];
    }
    return 0.5 * acc;
  };
  p.m0 = [G, sp, du](double r) {
    const double a = r + G.upper_growth(r, du);
    return 0.5 * sp * a * a;
  };
  if (envelopes == Envelopes::derived) {
    // Phi >= (sigma-/2)(|G| - |y|)^2 >= sigma- g-^2 / 4 - sigma- r^2 / 2 with
    // g- = 0 unless the map is the identity.
    const bool iso = G.kind == ForwardMap::Kind::identity;
    p.m1 = [sm, iso](double r, double t) {
      const double g = iso ? t : 0.0;
      return std::max(0.0, sm * g * g / 4.0 - sm * r * r / 2.0);
    };
    p.m2 = [G, sp, du](double r, double t) { return std::log(sp * (r + G.upper_growth(t, du))); };
  } else {
    const double cm = G.c_minus;
    const double cp = G.c_plus;
    const double kappa = G.kappa;
    p.m1 = [sm, cm](double, double t) { return sm * cm * log_plus(t); };
    p.m2 = [cp, kappa](double r, double t) { return std::log(r + cp * std::pow(t, kappa)); };
  }
  p.m3 = [](double, double) { return 0.0; };
  return p;
}

// --- batches and posteriors ------------------------------------------------------

std::vector<double> evaluate_misfit_batch(const PotentialSpec& potential,
                                          const FieldEnsemble& ensemble,
                                          std::span<const double> y) {
  if (!potential.misfit) throw InvalidSpec("potential has no misfit");
  const std::size_t width = input_width(potential, ensemble);
  if (potential.input_dim != 0 && width != potential.input_dim)
    throw DimensionMismatch("samples have " + std::to_string(width) + " entries, potential expects " +
                            std::to_string(potential.input_dim));
  if (potential.data_dim != 0 && y.size() != potential.data_dim)
    throw DimensionMismatch("data has " + std::to_string(y.size()) + " entries, potential expects " +
                            std::to_string(potential.data_dim));
  return per_sample(ensemble.n_samples, [&](std::size_t i) {
    const double v = potential.misfit(input_of(potential, ensemble, i), y);
    if (!std::isfinite(v)) throw NumericError("misfit is not finite at sample " + std::to_string(i));
    return v;
  });
}

std::vector<double> sample_norms(const PotentialSpec& potential, const FieldEnsemble& ensemble) {
  input_width(potential, ensemble);
  return per_sample(ensemble.n_samples,
                    [&](std::size_t i) { return potential.norm(input_of(potential, ensemble, i)); });
}

std::uint64_t reference_id(const FieldEnsemble& ensemble) {
  return stream_key(ensemble.spec_hash, ensemble.seed, ensemble.n_samples);
}

NormalizationEstimate normalization_from_misfit(std::span<const double> misfit) {
  if (misfit.empty()) throw DegenerateWeights("empty ensemble");
  const double lo = *std::min_element(misfit.begin(), misfit.end());
  std::vector<double> w(misfit.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-(misfit[i] - lo));
  const auto m = mean_and_stderr(w);
  NormalizationEstimate z;
  z.log_shift = -lo;
  z.log_z = -lo + std::log(m.mean);
  const double scale = std::exp(-lo);
  z.z = scale * m.mean;
  z.std_error = scale * m.std_error;
  z.underflow = !(z.z > 0.0) || !std::isfinite(z.z);
  std::vector<double> sq(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sq[i] = w[i] * w[i];
  const double s1 = deterministic_sum(w);
  z.ess = s1 * s1 / deterministic_sum(sq);
  if (z.ess < kMinEss)
    throw DegenerateWeights("effective sample size " + format_double(z.ess) + " is below 10");
  return z;
}

NormalizationEstimate normalization_constant(const PotentialSpec& potential,
                                             const FieldEnsemble& ensemble,
                                             std::span<const double> y) {
  return normalization_from_misfit(evaluate_misfit_batch(potential, ensemble, y));
}

PosteriorEstimate posterior_from_terms(std::uint64_t reference, std::span<const double> y,
                                       std::span<const double> misfit,
                                       std::span<const double> perturbation) {
  if (!perturbation.empty() && perturbation.size() != misfit.size())
    throw DimensionMismatch("perturbation must match the misfit batch");
  const std::size_t n = misfit.size();
  if (n == 0) throw DegenerateWeights("empty ensemble");
  const double phi_lo = *std::min_element(misfit.begin(), misfit.end());
  const double d_lo =
      perturbation.empty() ? 0.0 : *std::min_element(perturbation.begin(), perturbation.end());
  std::vector<double> total(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = perturbation.empty() ? 0.0 : perturbation[i] - d_lo;
    w[i] = std::exp(-(misfit[i] - phi_lo) - d);
    total[i] = perturbation.empty() ? misfit[i] : misfit[i] + perturbation[i];
  }
  auto z = normalization_from_misfit(total);
  WeightedSampleMeasure measure(reference, std::move(w), -phi_lo - d_lo);
  const double ess = measure.effective_sample_size();
  return PosteriorEstimate{{y.begin(), y.end()}, z, std::move(measure), ess};
}

PosteriorEstimate posterior(const PotentialSpec& potential, const FieldEnsemble& ensemble,
                            std::span<const double> y) {
  const auto phi = evaluate_misfit_batch(potential, ensemble, y);
  return posterior_from_terms(reference_id(ensemble), y, phi);
}

MeanEstimate posterior_expectation(std::span<const double> f, const PosteriorEstimate& post) {
  const auto& w = post.measure.weights();
  if (f.size() != w.size()) throw DimensionMismatch("f must be evaluated on the reference sample");
  const std::size_t n = w.size();
  std::vector<double> wf(n);
  for (std::size_t i = 0; i < n; ++i) wf[i] = w[i] * f[i];
  const double den = deterministic_sum(w);
  MeanEstimate out;
  out.mean = deterministic_sum(wf) / den;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (w[i] / den) * (f[i] - out.mean);
    r[i] = d * d;
  }
  out.std_error = std::sqrt(deterministic_sum(r));
  return out;
}

// --- integrability -------------------------------------------------------------

IntegrabilityEstimate running_mean_estimate(std::span<const double> terms) {
  IntegrabilityEstimate est;
  est.estimate = mean_and_stderr(terms);
  std::size_t m = terms.size();
  for (int k = 0; k <= kMaxHalvings && m >= kMinPrefix; ++k, m /= 2) {
    est.prefix_sizes.push_back(m);
    est.prefix_means.push_back(deterministic_mean(terms.first(m)));
  }
  for (std::size_t k = 1; k < est.prefix_means.size(); ++k) {
    const double a = est.prefix_means[k - 1];
    const double b = est.prefix_means[k];
    const double scale = std::max(std::abs(a), std::abs(b));
    if (!std::isfinite(a) || !std::isfinite(b) || (scale > 0.0 && std::abs(a - b) > kUnstableJump * scale))
      est.unstable = true;
  }
  if (!std::isfinite(est.estimate.mean)) est.unstable = true;
  return est;
}

IntegrabilityReport integrability_estimates(const PotentialSpec& potential,
                                            const FieldEnsemble& ensemble, double r) {
  if (!(r > 0.0)) throw OutOfRange("r", "radius must be > 0");
  const auto t = sample_norms(potential, ensemble);
  const std::size_t n = t.size();
  auto env = [&](const std::function<double(double, double)>& m, std::size_t i) {
    return m ? m(r, t[i]) : 0.0;
  };
  const auto m1 = per_sample(n, [&](std::size_t i) { return env(potential.m1, i); });
  const auto s1 = per_sample(n, [&](std::size_t i) { return std::exp(-m1[i]); });
  const auto s12 = per_sample(n, [&](std::size_t i) { return std::exp(2.0 * env(potential.m2, i) - m1[i]); });
  const auto s13 = per_sample(n, [&](std::size_t i) { return std::exp(2.0 * env(potential.m3, i) - m1[i]); });
  IntegrabilityReport rep;
  rep.r = r;
  rep.s1 = running_mean_estimate(s1);
  rep.s12 = running_mean_estimate(s12);
  rep.s13 = running_mean_estimate(s13);
  rep.divergence_flag = rep.s1.unstable || rep.s12.unstable || rep.s13.unstable;
  return rep;
}

// --- probes ----------------------------------------------------------------------------

ProbeReport probe_assumptions(const PotentialSpec& potential, double r, std::size_t du,
                              std::size_t dy, std::uint64_t seed, std::size_t n_probes) {
  if (!(r > 0.0)) throw OutOfRange("r", "radius must be > 0");
  auto ball_point = [r](Stream& s, std::size_t d) {
    std::vector<double> v(d);
    for (double& x : v) x = s.normal();
    const double len = euclid(v);
    const double rad = r * s.uniform01();
    if (len > 0.0)
      for (double& x : v) x *= rad / len;
    return v;
  };
  ProbeReport rep;
  rep.probes = n_probes;
  rep.min_lower_gap = std::numeric_limits<double>::infinity();
  const double bound = potential.m0 ? potential.m0(r) : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_probes; ++k) {
    Stream s(stream_key(seed, 0x70726f6265ULL, k));
    // Inputs inside the r-ball for A0; stretched inputs for the growth envelopes.
    auto u = ball_point(s, du);
    const double stretch = std::exp(6.0 * s.uniform01());
    auto y1 = ball_point(s, dy);
    auto y2 = ball_point(s, dy);
    const double phi_ball = potential.misfit(u, y1);
    rep.max_abs_misfit = std::max(rep.max_abs_misfit, std::abs(phi_ball));
    for (double& x : u) x *= stretch;
    const double t = potential.norm(u);
    const double p1 = potential.misfit(u, y1);
    const double p2 = potential.misfit(u, y2);
    if (potential.m1) rep.min_lower_gap = std::min(rep.min_lower_gap, p1 - potential.m1(r, t));
    double dyn = 0.0;
    for (std::size_t i = 0; i < dy; ++i) dyn += (y1[i] - y2[i]) * (y1[i] - y2[i]);
    dyn = std::sqrt(dyn);
    if (potential.m2 && dyn > 0.0)
      rep.max_lipschitz_ratio =
          std::max(rep.max_lipschitz_ratio, std::abs(p1 - p2) / (std::exp(potential.m2(r, t)) * dyn));
  }
  rep.bounded = rep.max_abs_misfit <= bound * (1.0 + kRoundoff);
  rep.lower_holds = !potential.m1 || rep.min_lower_gap >= -kRoundoff;
  rep.lipschitz_holds = rep.max_lipschitz_ratio <= 1.0 + 1e-9;
  return rep;
}

// --- sweeps ----------------------------------------------------------------------

WellPosednessReport data_lipschitz_sweep(const PotentialSpec& potential,
                                         const FieldEnsemble& ensemble,
                                         std::span<const double> y,
                                         std::span<const double> epsilons,
                                         std::span<const double> direction,
                                         const SweepOptions& options) {
  if (direction.size() != y.size()) throw DimensionMismatch("direction must match the data");
  for (double eps : epsilons) {
    const auto yp = shifted(y, direction, eps);
    if (!(euclid(yp) < options.radius) || !(euclid(y) < options.radius))
      throw OutOfRange("epsilon", "perturbed data leaves the ball ||y|| < r");
  }
  WellPosednessReport rep;
  rep.kind = "data";
  rep.seed = ensemble.seed;
  rep.n_samples = ensemble.n_samples;
  const auto ref = reference_id(ensemble);
  const auto base = posterior_from_terms(ref, y, evaluate_misfit_batch(potential, ensemble, y));
  const auto norms = sample_norms(potential, ensemble);
  const auto probes = indicator_probes(potential, ensemble, norms);
  for (double eps : epsilons) {
    const auto yp = shifted(y, direction, eps);
    const auto other = posterior_from_terms(ref, yp, evaluate_misfit_batch(potential, ensemble, yp));
    SweepPoint pt = compare(base, other, probes);
    pt.perturbation = std::abs(eps) * euclid(direction);
    pt.parameter = eps;
    rep.points.push_back(pt);
  }
  if (options.with_integrability && std::isfinite(options.radius))
    rep.integrability = integrability_estimates(potential, ensemble, options.radius);
  finish_report(rep);
  return rep;
}

ZLipschitzCheck z_lipschitz_check(const PotentialSpec& potential, const FieldEnsemble& ensemble,
                                  std::span<const double> y, std::span<const double> epsilons,
                                  std::span<const double> direction) {
  std::vector<double> dir(direction.begin(), direction.end());
  if (dir.empty()) {
    dir.assign(y.size(), 0.0);
    if (!dir.empty()) dir[0] = 1.0;
  }
  if (dir.size() != y.size()) throw DimensionMismatch("direction must match the data");
  const double len = euclid(dir);
  // Both Z values share one shift so their difference is not lost to rescaling.
  const auto phi0 = evaluate_misfit_batch(potential, ensemble, y);
  ZLipschitzCheck out;
  const double lo0 = *std::min_element(phi0.begin(), phi0.end());
  for (double eps : epsilons) {
    out.epsilons.push_back(eps);
    if (eps == 0.0) {
      out.ratios.push_back(0.0);
      continue;
    }
    const auto phi1 = evaluate_misfit_batch(potential, ensemble, shifted(y, dir, eps));
    const auto diff = per_sample(phi0.size(), [&](std::size_t i) {
      return std::exp(-(phi0[i] - lo0)) - std::exp(-(phi1[i] - lo0));
    });
    out.ratios.push_back(std::exp(-lo0) * std::abs(deterministic_mean(diff)) / (std::abs(eps) * len));
  }
  out.holds = !out.ratios.empty();
  double ref = 0.0;
  double widest = -1.0;
  for (std::size_t k = 0; k < out.ratios.size(); ++k)
    if (std::abs(out.epsilons[k]) > widest && out.epsilons[k] != 0.0) {
      widest = std::abs(out.epsilons[k]);
      ref = out.ratios[k];
    }
  for (double r : out.ratios)
    out.holds = out.holds && std::isfinite(r) && r <= 1.5 * ref + kRoundoff;
  return out;
}

double PerturbationFamily::operator()(std::span<const double> u, double norm) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::sine_norm:
      return std::sin(norm);
    case Kind::constant:
      return constant;
    case Kind::custom:
      return custom(u, norm);
  }
  return 0.0;
}

const char* PerturbationFamily::name() const {
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::sine_norm:
      return "sine_norm";
    case Kind::constant:
      return "constant";
    case Kind::custom:
      return "custom";
  }
  return "custom";
}

double inverse_rate(std::size_t n) { return 1.0 / static_cast<double>(n); }

WellPosednessReport likelihood_perturbation_sweep(
    const PotentialSpec& potential, const PerturbationFamily& family,
    const std::function<double(std::size_t)>& psi, const FieldEnsemble& ensemble,
    std::span<const double> y, std::span<const std::size_t> n_list, const SweepOptions& options) {
  if (family.kind == PerturbationFamily::Kind::custom && !family.custom)
    throw InvalidSpec("custom perturbation family without a function");
  WellPosednessReport rep;
  rep.kind = "likelihood";
  rep.seed = ensemble.seed;
  rep.n_samples = ensemble.n_samples;
  const auto ref = reference_id(ensemble);
  const auto phi = evaluate_misfit_batch(potential, ensemble, y);
  const auto base = posterior_from_terms(ref, y, phi);
  const auto norms = sample_norms(potential, ensemble);
  const auto probes = indicator_probes(potential, ensemble, norms);
  const auto h = per_sample(ensemble.n_samples, [&](std::size_t i) {
    return family(input_of(potential, ensemble, i), norms[i]);
  });
  for (std::size_t N : n_list) {
    const double rate = psi(N);
    std::vector<double> d(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) d[i] = rate * h[i];
    const auto other = posterior_from_terms(ref, y, phi, d);
    SweepPoint pt = compare(base, other, probes);
    pt.perturbation = rate;
    pt.parameter = static_cast<double>(N);
    rep.points.push_back(pt);
  }
  if (options.with_integrability && std::isfinite(options.radius))
    rep.integrability = integrability_estimates(potential, ensemble, options.radius);
  finish_report(rep);
  return rep;
}

// --- output ----------------------------------------------------------------------

namespace {

nlohmann::json estimate_json(const IntegrabilityEstimate& e) {
  return {{"estimate", e.estimate.mean},
          {"stderr", e.estimate.std_error},
          {"prefix_sizes", e.prefix_sizes},
          {"prefix_means", e.prefix_means},
          {"unstable", e.unstable}};
}

}  // namespace

std::string to_json_text(const WellPosednessReport& rep) {
  nlohmann::json j;
  j["kind"] = rep.kind;
  j["seed"] = rep.seed;
  j["n_samples"] = rep.n_samples;
  nlohmann::json est = nlohmann::json::array();
  nlohmann::json err = nlohmann::json::array();
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : rep.points) {
    est.push_back(p.hellinger.value);
    err.push_back(p.hellinger.std_error);
    pts.push_back({{"perturbation", p.perturbation},
                   {"parameter", p.parameter},
                   {"hellinger", p.hellinger.value},
                   {"stderr", p.hellinger.std_error},
                   {"total_variation", p.total_variation},
                   {"kraft_holds", p.kraft_holds},
                   {"gap_holds", p.gap_holds}});
  }
  j["estimates"] = est;
  j["stderrs"] = err;
  j["points"] = pts;
  if (rep.fit) {
    j["slope"] = rep.fit->slope;
    j["slope_ci"] = {rep.fit->slope_ci_low, rep.fit->slope_ci_high};
    j["intercept"] = rep.fit->intercept;
    j["fit_residual"] = rep.fit->residual_rms;
  } else {
    j["slope"] = nullptr;
    j["slope_ci"] = nullptr;
  }
  if (rep.integrability) {
    const auto& in = *rep.integrability;
    j["integrability"] = {{"r", in.r},
                          {"S1", estimate_json(in.s1)},
                          {"S12", estimate_json(in.s12)},
                          {"S13", estimate_json(in.s13)},
                          {"divergence_flag", in.divergence_flag}};
  }
  j["verdicts"] = rep.verdicts;
  return j.dump(2);
}

void write_sweep_csv(const std::string& path, const WellPosednessReport& rep,
                     std::uint64_t config_hash) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : rep.points)
    rows.push_back({p.perturbation, p.parameter, p.hellinger.value, p.hellinger.std_error,
                    p.total_variation});
  write_table_csv(path, csv_comment(config_hash, rep.seed),
                  {"perturbation", "parameter", "d_H", "stderr", "tv"}, rows);
}

// --- growth ------------------------------------------------------------------------

GrowthVerdict growth_admissibility(double kappa, double c_minus, double sigma_minus, double p,
                                   double alpha) {
  if (!(kappa >= 0.0) || !(c_minus >= 0.0) || !(sigma_minus >= 0.0) || !(p >= 0.0))
    throw OutOfRange("growth", "kappa, c-, sigma- and p must be >= 0");
  if (!(p < alpha))
    throw InvalidMomentOrder("moment order p = " + format_double(p) +
                             " must be below the stability index alpha = " + format_double(alpha));
  GrowthVerdict v;
  v.exponent = 2.0 * kappa - sigma_minus * c_minus;
  v.margin = p - v.exponent;
  v.admissible = v.exponent <= p;
  return v;
}

const char* to_string(const GrowthVerdict& v) { return v.admissible ? "Admissible" : "NotAdmissible"; }

}  // namespace stableinfer
