#include "stableinfer/stable_core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "stableinfer/errors.hpp"
#include "stableinfer/parallel.hpp"

namespace stableinfer {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
// exp(-41.4) is below 1e-18.
constexpr double kDecayExponent = 41.4;

double skew_factor(double alpha, double beta) {
  if (alpha == 2.0 || beta == 0.0) return 0.0;
  if (alpha == 1.0) return beta * 2.0 / kPi;
  return beta * std::tan(kPi * alpha / 2.0);
}

// Phase correction w(s) so that the phase of the standardized characteristic
// function at s > 0 is -skew * w(s).
double phase_w(double alpha, double s) {
  if (s == 0.0) return 0.0;
  if (alpha == 1.0) return s * std::log(s);
  return s - std::pow(s, alpha);
}

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

// int_0^s_max exp(-s^alpha) trig(s zeta + skew w(s)) [/ s] ds, integrated on
// pieces short enough that each holds at most about half an oscillation.
double fourier_integral(double alpha, double zeta, double skew, double s_max, bool gil_pelaez,
                        const QuadratureSettings& settings) {
  auto integrand = [=](double s) {
    const double phase = s * zeta + skew * phase_w(alpha, s);
    const double decay = std::exp(-std::pow(s, alpha));
    if (!gil_pelaez) return decay * std::cos(phase);
    if (s == 0.0) return 0.0;
    return decay * std::sin(phase) / s;
  };
  double slope = 1.0;
  if (alpha == 1.0) {
    slope = 1.0 + std::abs(std::log(s_max));
  } else if (alpha > 1.0) {
    slope = 1.0 + alpha * std::pow(s_max, alpha - 1.0);
  }
  const double freq = std::abs(zeta) + std::abs(skew) * slope + 1.0;
  const auto pieces =
      static_cast<std::size_t>(std::clamp(std::ceil(s_max * freq / kPi), 8.0, 200000.0));
  const double h = s_max / static_cast<double>(pieces);
  long double total = integrate_singular(integrand, 0.0, h, settings).value;
  using boost::math::quadrature::gauss_kronrod;
  for (std::size_t k = 1; k < pieces; ++k) {
    const double a = h * static_cast<double>(k);
    total += gauss_kronrod<double, 31>::integrate(integrand, a, a + h, 0);
  }
  return static_cast<double>(total);
}

}  // namespace

// --- parameters -----------------------------------------------------------

StableParams validate_params(double alpha, double beta, double gamma, double delta) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 2.0)
    throw OutOfRange("alpha", "stability index must lie in (0, 2]");
  if (!std::isfinite(beta) || beta <= -1.0 || beta >= 1.0)
    throw OutOfRange("beta",
                     "skewness must lie strictly inside (-1, 1); the totally skewed endpoints "
                     "are excluded by the standing support assumption");
  if (!std::isfinite(gamma) || gamma < 0.0) throw OutOfRange("gamma", "scale must be >= 0");
  if (!std::isfinite(delta)) throw OutOfRange("delta", "location must be finite");
  if (std::abs(alpha - 1.0) < kAlphaOneSnap) alpha = 1.0;
  if (alpha == 2.0) beta = 0.0;
  return StableParams::make(alpha, beta, gamma, delta);
}

StableParams StableParams::make(double alpha, double beta, double gamma, double delta) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 2.0 || !std::isfinite(beta) ||
      beta <= -1.0 || beta >= 1.0 || !std::isfinite(gamma) || gamma < 0.0 ||
      !std::isfinite(delta))
    return validate_params(alpha, beta, gamma, delta);
  if (std::abs(alpha - 1.0) < kAlphaOneSnap) alpha = 1.0;
  if (alpha == 2.0) beta = 0.0;
  return StableParams(alpha, beta, gamma, delta);
}

StableParams StableParams::normal(double mean, double sd) {
  if (!(sd >= 0.0)) throw OutOfRange("sd", "standard deviation must be >= 0");
  return make(2.0, 0.0, sd / std::numbers::sqrt2, mean);
}

StableParams StableParams::cauchy(double delta, double gamma) {
  return make(1.0, 0.0, gamma, delta);
}

double MomentValue::value() const {
  if (kind_ != Kind::finite)
    throw NumericError(kind_ == Kind::infinite ? "moment is infinite" : "moment is undefined");
  return value_;
}

std::complex<double> char_fn(const StableParams& p, double t) {
  const double s = p.gamma() * std::abs(t);
  const double sign = t < 0.0 ? -1.0 : 1.0;
  const double decay = std::exp(-std::pow(s, p.alpha()));
  const double phase =
      p.delta() * t - sign * skew_factor(p.alpha(), p.beta()) * phase_w(p.alpha(), s);
  return std::polar(decay, phase);
}

// --- sampling -------------------------------------------------------------

double cms_standard(double alpha, double beta, double v, double w) {
  if (alpha == 1.0) {
    const double half_pi = kPi / 2.0;
    const double b = half_pi + beta * v;
    return (b * std::tan(v) - beta * std::log(half_pi * w * std::cos(v) / b)) * 2.0 / kPi;
  }
  const double t = alpha == 2.0 ? 0.0 : beta * std::tan(kPi * alpha / 2.0);
  const double b = std::atan(t) / alpha;
  const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
  const double av = alpha * (v + b);
  return s * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - av) / w, (1.0 - alpha) / alpha);
}

double sample_stable_one(const StableParams& p, Stream& stream) {
  if (p.is_degenerate()) return p.delta();
  const double v = stream.uniform(-kPi / 2.0, kPi / 2.0);
  const double w = stream.exponential();
  double z = cms_standard(p.alpha(), p.beta(), v, w);
  // Standardized one-parametrisation draw to the zero parametrisation.
  if (p.alpha() != 1.0) z -= skew_factor(p.alpha(), p.beta());
  return p.gamma() * z + p.delta();
}

std::vector<double> sample_stable(const StableParams& p, std::size_t n, const RngStream& rng) {
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Stream s = rng.at(i);
      out[i] = sample_stable_one(p, s);
    }
  });
  return out;
}

double cauchy_from_normals(double gamma, double delta, double x_std, double z) {
  return delta + gamma * x_std / z;
}

std::vector<double> sample_cauchy_via_ratio(double gamma, double delta, std::size_t n,
                                            const RngStream& rng) {
  if (!(gamma > 0.0)) throw OutOfRange("gamma", "must be > 0");
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Stream s = rng.at(i);
      const double x = s.normal();
      double z = s.normal();
      while (z == 0.0) z = s.normal();
      out[i] = cauchy_from_normals(gamma, delta, x, z);
    }
  });
  return out;
}

double cauchy_from_angle(double gamma, double theta) { return gamma * std::tan(theta); }

std::vector<double> sample_cauchy_via_circle(double gamma, std::size_t n, const RngStream& rng) {
  if (!(gamma > 0.0)) throw OutOfRange("gamma", "must be > 0");
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Stream s = rng.at(i);
      out[i] = cauchy_from_angle(gamma, s.uniform(-kPi / 2.0, kPi / 2.0));
    }
  });
  return out;
}

// --- Cauchy ---------------------------------------------------------------

double cauchy_pdf(double delta, double gamma, double u) {
  const double z = (u - delta) / gamma;
  return 1.0 / (kPi * gamma * (1.0 + z * z));
}

double cauchy_log_pdf(double delta, double gamma, double u) {
  const double z = (u - delta) / gamma;
  return -std::log(kPi * gamma) - std::log1p(z * z);
}

double cauchy_cdf(double delta, double gamma, double u) {
  if (u == kInf) return 1.0;
  if (u == -kInf) return 0.0;
  const double z = (u - delta) / gamma;
  // Upper tail via the complementary angle to keep relative accuracy.
  if (z > 1.0) return 1.0 - std::atan(1.0 / z) / kPi;
  return 0.5 + std::atan(z) / kPi;
}

// --- densities ------------------------------------------------------------

StableDensity::StableDensity(StableParams params, QuadratureSettings settings)
    : params_(params), settings_(settings) {
  if (params_.is_degenerate()) throw ZeroScale("density of a point mass does not exist");
  skew_ = skew_factor(params_.alpha(), params_.beta());
  s_max_ = std::pow(kDecayExponent, 1.0 / params_.alpha());
}

double StableDensity::pdf(double x) const {
  const double g = params_.gamma();
  if (params_.is_cauchy()) return cauchy_pdf(params_.delta(), g, x);
  const double zeta = (x - params_.delta()) / g;
  if (params_.is_gaussian()) {
    // N(delta, 2 gamma^2)
    return std::exp(-zeta * zeta / 4.0) / (2.0 * g * std::sqrt(kPi));
  }
  const double v = fourier_integral(params_.alpha(), zeta, skew_, s_max_, false, settings_);
  return std::max(0.0, v / (kPi * g));
}

double StableDensity::cdf(double x) const {
  const double g = params_.gamma();
  if (params_.is_cauchy()) return cauchy_cdf(params_.delta(), g, x);
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  const double zeta = (x - params_.delta()) / g;
  if (params_.is_gaussian()) return 0.5 * std::erfc(-zeta / 2.0);
  const double v = fourier_integral(params_.alpha(), zeta, skew_, s_max_, true, settings_);
  return std::clamp(0.5 + v / kPi, 0.0, 1.0);
}

// --- closure arithmetic ---------------------------------------------------

StableParams affine_transform(const StableParams& p, double a, double b) {
  if (a == 0.0) throw ZeroScale("affine map with a = 0 does not preserve a stable law");
  const double sign = a < 0.0 ? -1.0 : 1.0;
  return StableParams::make(p.alpha(), sign * p.beta(), std::abs(a) * p.gamma(),
                            a * p.delta() + b);
}

StableParams convolve(const StableParams& p1, const StableParams& p2) {
  if (p1.alpha() != p2.alpha()) throw AlphaMismatch("convolution needs equal stability indices");
  const double alpha = p1.alpha();
  const double w1 = std::pow(p1.gamma(), alpha);
  const double w2 = std::pow(p2.gamma(), alpha);
  const double wsum = w1 + w2;
  if (wsum == 0.0) return StableParams::make(alpha, 0.0, 0.0, p1.delta() + p2.delta());
  const double beta = (p1.beta() * w1 + p2.beta() * w2) / wsum;
  const double gamma = std::pow(wsum, 1.0 / alpha);
  double delta = p1.delta() + p2.delta();
  if (alpha == 1.0) {
    delta += 2.0 / kPi *
             (beta * xlogx(gamma) - p1.beta() * xlogx(p1.gamma()) - p2.beta() * xlogx(p2.gamma()));
  } else if (alpha != 2.0) {
    delta += std::tan(kPi * alpha / 2.0) *
             (beta * gamma - p1.beta() * p1.gamma() - p2.beta() * p2.gamma());
  }
  return StableParams::make(alpha, beta, gamma, delta);
}

// --- moments --------------------------------------------------------------

MomentValue fractional_moment(const StableParams& p, double p_order, const QuadratureSettings& qs) {
  if (!(p_order > 0.0)) throw OutOfRange("p", "moment order must be > 0");
  if (p.is_degenerate()) return MomentValue::finite(std::pow(std::abs(p.delta()), p_order));
  if (p.alpha() < 2.0 && p_order >= p.alpha()) return MomentValue::infinite();

  const double g = p.gamma();
  const double d = p.delta();
  if (p.is_gaussian()) {
    const double sd = std::numbers::sqrt2 * g;
    auto f = [&](double x) {
      const double z = (x - d) / sd;
      return std::pow(std::abs(x), p_order) * std::exp(-z * z / 2.0) /
             (sd * std::sqrt(2.0 * kPi));
    };
    const double lo = d - 40.0 * sd;
    const double hi = d + 40.0 * sd;
    double v = 0.0;
    if (lo < 0.0 && hi > 0.0) {
      v = integrate_singular(f, lo, 0.0, qs).value + integrate_singular(f, 0.0, hi, qs).value;
    } else {
      v = integrate_singular(f, lo, hi, qs).value;
    }
    return MomentValue::finite(v);
  }
  if (p.is_cauchy()) {
    auto right = [&](double x) { return std::pow(x, p_order) * cauchy_pdf(d, g, x); };
    auto left = [&](double x) { return std::pow(x, p_order) * cauchy_pdf(d, g, -x); };
    return MomentValue::finite(integrate_value(right, 0.0, kInf, qs) +
                               integrate_value(left, 0.0, kInf, qs));
  }
  // Characteristic-function route; 1 - Re phi is formed without cancellation.
  auto f = [&](double t) {
    if (t == 0.0) return 0.0;
    const double s = g * t;
    const double a = std::pow(s, p.alpha());
    const double theta = d * t - skew_factor(p.alpha(), p.beta()) * phase_w(p.alpha(), s);
    const double sh = std::sin(theta / 2.0);
    const double one_minus_re = -std::expm1(-a) + 2.0 * sh * sh * std::exp(-a);
    if (one_minus_re <= 0.0) return 0.0;
    return std::exp(std::log(one_minus_re) - (p_order + 1.0) * std::log(t));
  };
  const double split = 1.0 / g;
  const double integral =
      integrate_singular(f, 0.0, split, qs).value + integrate_value(f, split, kInf, qs);
  const double c = 2.0 / kPi * std::tgamma(p_order + 1.0) * std::sin(p_order * kPi / 2.0);
  return MomentValue::finite(c * integral);
}

// --- tails ----------------------------------------------------------------

double tail_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw OutOfRange("alpha", "power-law tails need alpha < 2");
  if (std::abs(alpha - 1.0) < kAlphaOneSnap) alpha = 1.0;
  static std::mutex mutex;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
  }
  // P[u > x] = (1/pi) int_0^inf (1 - exp(-(s/x)^alpha)) sin(s) / s ds, summed
  // over half periods; the tail past the last one uses the sine-integral
  // asymptotic series.
  const double x = 1e4;
  auto f = [=](double s) {
    if (s == 0.0) return 0.0;
    return -std::expm1(-std::pow(s / x, alpha)) * std::sin(s) / s;
  };
  const auto halves = static_cast<std::size_t>(
      std::ceil(x * std::pow(kDecayExponent, 1.0 / alpha) / kPi));
  QuadratureSettings qs;
  qs.rel_tol = 1e-12;
  long double total = integrate_singular(f, 0.0, kPi, qs).value;
  using boost::math::quadrature::gauss_kronrod;
  for (std::size_t k = 1; k < halves; ++k) {
    const double a = kPi * static_cast<double>(k);
    total += gauss_kronrod<double, 15>::integrate(f, a, a + kPi, 0);
  }
  const double end = kPi * static_cast<double>(halves);
  const double sign = halves % 2 == 0 ? 1.0 : -1.0;
  total += sign * (1.0 / end - 2.0 / (end * end * end) + 24.0 / std::pow(end, 5.0));
  const double c = std::pow(x, alpha) * static_cast<double>(total) / kPi;
  std::lock_guard<std::mutex> lock(mutex);
  cache[alpha] = c;
  return c;
}

TailApprox tail_asymptote(const StableParams& p, double x) {
  const double alpha = p.alpha();
  const double c = tail_constant(alpha) * std::pow(p.gamma(), alpha) * (1.0 + p.beta());
  const double survival = c * std::pow(x, -alpha);
  return {survival, alpha * survival / x};
}

TruncatedMoments truncated_cauchy_moments(double gamma, double A) {
  if (!(A > 0.0)) throw OutOfRange("A", "truncation level must be > 0");
  if (!(gamma >= 0.0)) throw OutOfRange("gamma", "scale must be >= 0");
  if (gamma == 0.0) return {};
  const double ratio = A / gamma;
  TruncatedMoments m;
  // 1 - (2/pi) arctan(A/gamma), written without the cancellation.
  m.p_exceed = 2.0 / kPi * std::atan(gamma / A);
  m.m1 = gamma / kPi * std::log1p(ratio * ratio);
  // (2 gamma^2 / pi) int_0^(A/gamma) x^2 / (1 + x^2) dx
  m.m2 = 2.0 * A * gamma / kPi - 2.0 * gamma * gamma / kPi * std::atan(ratio);
  return m;
}

TruncatedMomentTable::TruncatedMomentTable(double alpha, double beta, std::vector<double> orders,
                                           double cutoff, double step)
    : alpha_(alpha), orders_(std::move(orders)), cutoff_(cutoff), step_(step) {
  const StableDensity density(StableParams::make(alpha, beta, 1.0, 0.0));
  const auto cells = static_cast<std::size_t>(std::ceil(cutoff / step));
  step_ = cutoff / static_cast<double>(cells);
  // Folded density |u| at cell edges and midpoints.
  std::vector<double> g(2 * cells + 1);
  parallel_for(g.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double x = 0.5 * step_ * static_cast<double>(i);
      g[i] = density.pdf(x) + density.pdf(-x);
    }
  });
  mass_.assign(cells + 1, 0.0);
  moments_.assign(orders_.size(), std::vector<double>(cells + 1, 0.0));
  auto simpson = [&](std::size_t c, double m) {
    const double a = step_ * static_cast<double>(c);
    const double xs[3] = {a, a + 0.5 * step_, a + step_};
    double acc = 0.0;
    const double w[3] = {1.0, 4.0, 1.0};
    for (int k = 0; k < 3; ++k) {
      const double xm = m == 0.0 ? 1.0 : std::pow(xs[k], m);
      acc += w[k] * xm * g[2 * c + static_cast<std::size_t>(k)];
    }
    return acc * step_ / 6.0;
  };
  for (std::size_t c = 0; c < cells; ++c) {
    mass_[c + 1] = mass_[c] + simpson(c, 0.0);
    for (std::size_t k = 0; k < orders_.size(); ++k)
      moments_[k][c + 1] = moments_[k][c] + simpson(c, orders_[k]);
  }
  tail_mass_ = alpha >= 2.0 ? 0.0 : std::max(0.0, 1.0 - mass_.back());
}

double TruncatedMomentTable::interpolate(const std::vector<double>& cumulative, double b) const {
  if (b <= 0.0) return 0.0;
  const double pos = b / step_;
  const auto i = std::min(static_cast<std::size_t>(pos), cumulative.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return cumulative[i] + frac * (cumulative[i + 1] - cumulative[i]);
}

double TruncatedMomentTable::exceed(double b) const {
  if (b <= 0.0) return 1.0;
  if (b <= cutoff_) return std::max(0.0, 1.0 - interpolate(mass_, b));
  return tail_mass_ * std::pow(b / cutoff_, -alpha_);
}

double TruncatedMomentTable::moment(std::size_t k, double b) const {
  if (b <= cutoff_) return interpolate(moments_.at(k), b);
  const double m = orders_.at(k);
  const double base = moments_[k].back();
  if (tail_mass_ == 0.0) return base;
  const double scale = tail_mass_ * alpha_ * std::pow(cutoff_, alpha_);
  if (m == alpha_) return base + scale * std::log(b / cutoff_);
  return base + scale * (std::pow(b, m - alpha_) - std::pow(cutoff_, m - alpha_)) / (m - alpha_);
}

// --- KL -------------------------------------------------------------------

Density1D normal_density(double mean, double sd) {
  if (!(sd > 0.0)) throw OutOfRange("sd", "must be > 0");
  return {[=](double x) {
    const double z = (x - mean) / sd;
    return -0.5 * std::log(2.0 * kPi) - std::log(sd) - 0.5 * z * z;
  }};
}

Density1D cauchy_density(double delta, double gamma) {
  if (!(gamma > 0.0)) throw OutOfRange("gamma", "must be > 0");
  return {[=](double x) { return cauchy_log_pdf(delta, gamma, x); }};
}

MomentValue kl_divergence_1d(const Density1D& p, const Density1D& q, Interval domain,
                             const QuadratureSettings& settings) {
  if (!(domain.hi > domain.lo)) throw OutOfRange("domain", "need lo < hi");
  bool infinite = false;
  auto f = [&](double x) {
    const double lp = p.log_pdf(x);
    if (lp == -kInf) return 0.0;
    const double lq = q.log_pdf(x);
    if (lq == -kInf) {
      infinite = true;
      return 0.0;
    }
    return std::exp(lp) * (lp - lq);
  };
  const double mid = 0.5 * (domain.lo + domain.hi);
  double half = 0.5 * (domain.hi - domain.lo);
  double value = integrate_value(f, mid - half, mid + half, settings);
  for (int doubling = 0; doubling < 40 && !infinite; ++doubling) {
    const double inc = integrate_value(f, mid - 2.0 * half, mid - half, settings) +
                       integrate_value(f, mid + half, mid + 2.0 * half, settings);
    value += inc;
    half *= 2.0;
    if (std::abs(inc) <= 10.0 * std::max(settings.abs_tol, settings.rel_tol * std::abs(value)))
      return MomentValue::finite(std::max(0.0, value));
  }
  return MomentValue::infinite();
}

}  // namespace stableinfer
