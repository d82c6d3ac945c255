#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "stableinfer/quadrature.hpp"
#include "stableinfer/rng.hpp"

namespace stableinfer {

/// |alpha - 1| below this snaps to the alpha = 1 branch.
inline constexpr double kAlphaOneSnap = 1e-8;

/// Four-parameter stable law S(alpha, beta, gamma, delta; 0) in the
/// continuous ("zero") parametrisation.  Construct through make() or
/// validate_params(); every live instance satisfies
///   0 < alpha <= 2, -1 < beta < 1, gamma >= 0, delta finite,
/// with beta stored as 0 when alpha = 2.
class StableParams {
 public:
  static StableParams make(double alpha, double beta, double gamma, double delta);
  /// N(mean, sd^2) = S(2, 0, sd / sqrt 2, mean; 0).
  static StableParams normal(double mean, double sd);
  /// C(delta, gamma) = S(1, 0, gamma, delta; 0).
  static StableParams cauchy(double delta, double gamma);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  double delta() const noexcept { return delta_; }

  bool is_gaussian() const noexcept { return alpha_ == 2.0; }
  bool is_cauchy() const noexcept { return alpha_ == 1.0 && beta_ == 0.0; }
  bool is_degenerate() const noexcept { return gamma_ == 0.0; }

  bool operator==(const StableParams&) const = default;

 private:
  StableParams(double a, double b, double g, double d) : alpha_(a), beta_(b), gamma_(g), delta_(d) {}
  double alpha_;
  double beta_;
  double gamma_;
  double delta_;
};

/// Validates raw inputs; throws OutOfRange naming the offending parameter.
StableParams validate_params(double alpha, double beta, double gamma, double delta);

/// Finite(value) | Infinite | Undefined.
class MomentValue {
 public:
  enum class Kind { finite, infinite, undefined };

  static MomentValue finite(double v) { return MomentValue(Kind::finite, v); }
  static MomentValue infinite() { return MomentValue(Kind::infinite, 0.0); }
  static MomentValue undefined() { return MomentValue(Kind::undefined, 0.0); }

  Kind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == Kind::finite; }
  bool is_infinite() const noexcept { return kind_ == Kind::infinite; }
  /// Throws NumericError unless finite.
  double value() const;

 private:
  MomentValue(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

/// E[exp(i t u)] for u ~ params.
std::complex<double> char_fn(const StableParams& params, double t);

// --- sampling -------------------------------------------------------------

/// Chambers-Mallows-Stuck transform of V ~ U(-pi/2, pi/2), W ~ Exp(1) into a
/// standardized draw in the "one" parametrisation S(alpha, beta; 1).
double cms_standard(double alpha, double beta, double v, double w);

/// One draw from params using two uniforms of `stream`.
double sample_stable_one(const StableParams& params, Stream& stream);

/// n i.i.d. draws; draw k uses substream rng.at(k).
std::vector<double> sample_stable(const StableParams& params, std::size_t n, const RngStream& rng);

/// delta + gamma * x_std / z: the Gaussian-quotient construction of C(delta, gamma).
double cauchy_from_normals(double gamma, double delta, double x_std, double z);
std::vector<double> sample_cauchy_via_ratio(double gamma, double delta, std::size_t n,
                                            const RngStream& rng);

/// gamma * tan(theta): radial projection of the uniform angle theta onto a
/// line at distance gamma from the centre.
double cauchy_from_angle(double gamma, double theta);
std::vector<double> sample_cauchy_via_circle(double gamma, std::size_t n, const RngStream& rng);

// --- closed-form Cauchy ---------------------------------------------------

double cauchy_pdf(double delta, double gamma, double u);
double cauchy_log_pdf(double delta, double gamma, double u);
double cauchy_cdf(double delta, double gamma, double u);

// --- general densities ----------------------------------------------------

/// Density and distribution function of a non-degenerate stable law.  The
/// Gaussian and Cauchy cases are closed-form; everything else is obtained by
/// Fourier inversion of char_fn (pdf) and the Gil-Pelaez formula (cdf).
class StableDensity {
 public:
  explicit StableDensity(StableParams params, QuadratureSettings settings = {});

  double pdf(double x) const;
  double cdf(double x) const;
  const StableParams& params() const noexcept { return params_; }

 private:
  StableParams params_;
  QuadratureSettings settings_;
  double skew_ = 0.0;   // beta * tan(pi alpha / 2), or beta * 2 / pi at alpha = 1
  double s_max_ = 0.0;  // exp(-s^alpha) is negligible beyond this
};

// --- closure arithmetic ---------------------------------------------------

/// Law of a * u + b; throws ZeroScale if a == 0.
StableParams affine_transform(const StableParams& params, double a, double b);

/// Law of u1 + u2 for independent u1, u2; throws AlphaMismatch.
StableParams convolve(const StableParams& p1, const StableParams& p2);

// --- moments and tails ----------------------------------------------------

/// E[|u|^p]: Infinite for p >= alpha < 2, otherwise finite.  Cauchy and
/// Gaussian laws integrate |u|^p against their density; other laws use
///   E|u|^p = (2/pi) Gamma(p+1) sin(p pi / 2) * int_0^inf (1 - Re phi(t)) t^(-p-1) dt.
MomentValue fractional_moment(const StableParams& params, double p,
                              const QuadratureSettings& settings = {});

/// c_alpha in P[u > x] ~ c_alpha gamma^alpha (1 + beta) x^-alpha, calibrated
/// as x^alpha P[u > x] at x = 1e4 for the standardized symmetric law.
/// Cached per alpha; requires 0 < alpha < 2.
double tail_constant(double alpha);

struct TailApprox {
  double survival = 0.0;
  double pdf = 0.0;
};

/// Power-law tail approximations; meaningful only for large x.
TailApprox tail_asymptote(const StableParams& params, double x);

struct TruncatedMoments {
  double p_exceed = 0.0;  // P[|gamma u| >= A]
  double m1 = 0.0;        // E[|gamma u| 1[|gamma u| < A]]
  double m2 = 0.0;        // E[|gamma u|^2 1[|gamma u| < A]]
};

/// Closed forms for u standard Cauchy.  gamma = 0 gives the atom at zero.
/// The second moment is 2 A gamma / pi - (2 gamma^2 / pi) arctan(A / gamma).
TruncatedMoments truncated_cauchy_moments(double gamma, double A);

/// Truncated moments of a standardized S(alpha, beta; 0) variable, from a
/// density tabulated on [-cutoff, cutoff] and a power-law tail matched at
/// the cutoff.
class TruncatedMomentTable {
 public:
  TruncatedMomentTable(double alpha, double beta, std::vector<double> orders,
                       double cutoff = 30.0, double step = 0.025);

  /// P[|u| > b].
  double exceed(double b) const;
  /// E[|u|^orders[k] 1[|u| < b]].
  double moment(std::size_t k, double b) const;

 private:
  double interpolate(const std::vector<double>& cumulative, double b) const;

  double alpha_;
  std::vector<double> orders_;
  double cutoff_;
  double step_;
  double tail_mass_ = 0.0;
  std::vector<double> mass_;                  // cumulative P[|u| < x] on the grid
  std::vector<std::vector<double>> moments_;  // cumulative E[|u|^m 1[|u| < x]]
};

// --- divergences ----------------------------------------------------------

/// A univariate density given through its logarithm.
struct Density1D {
  std::function<double(double)> log_pdf;
};

Density1D normal_density(double mean, double sd);
Density1D cauchy_density(double delta, double gamma);

struct Interval {
  double lo = -10.0;
  double hi = 10.0;
};

/// KL(p || q) = int p log(p / q).  The integral is taken on `domain` and the
/// domain is doubled about its midpoint until one doubling changes the value
/// by less than 10 * max(abs_tol, rel_tol * |value|); after 40 doublings
/// without settling the divergence is reported Infinite.
MomentValue kl_divergence_1d(const Density1D& p, const Density1D& q, Interval domain = {},
                             const QuadratureSettings& settings = {});

}  // namespace stableinfer
