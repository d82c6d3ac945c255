#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stableinfer/quasi_banach.hpp"
#include "stableinfer/series_sampler.hpp"
#include "stableinfer/stats.hpp"

namespace stableinfer {

/// A misfit Phi(u; y) with declared growth envelopes in t = ||u||.
///
/// u is either the coefficient vector of a sample or its grid synthesis
/// (`on_grid`).  Envelopes are taken on trust; probe_assumptions spot-checks
/// them.
struct PotentialSpec {
  std::function<double(std::span<const double> u, std::span<const double> y)> misfit;
  std::function<double(double r)> m0;                // |Phi| <= M0 on the r-ball
  std::function<double(double r, double t)> m1;      // Phi >= M1
  std::function<double(double r, double t)> m2;      // data-Lipschitz log-factor
  std::function<double(double r, double t)> m3;      // approximation log-factor
  QuasiNormSpec u_norm = QuasiNormSpec::sequence(2.0);
  std::size_t input_dim = 0;  // 0 accepts any length
  std::size_t data_dim = 0;
  bool on_grid = false;

  double norm(std::span<const double> u) const { return quasi_norm(u, u_norm); }
};

/// Forward maps for the additive Gaussian model.
struct ForwardMap {
  enum class Kind { identity, linear, componentwise };

  Kind kind = Kind::identity;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // rows x cols, row-major
  // componentwise: G_i(u) = sign(u_i) c_plus |u_i|^kappa
  double kappa = 1.0;
  double c_plus = 1.0;
  double c_minus = 0.0;

  static ForwardMap identity();
  static ForwardMap linear(std::size_t rows, std::size_t cols, std::vector<double> matrix);
  static ForwardMap componentwise(double kappa, double c_plus, double c_minus);

  std::vector<double> apply(std::span<const double> u) const;
  /// g+(t) with ||G(u)|| <= g+(||u||) in the Euclidean norms, for inputs of length n.
  double upper_growth(double t, std::size_t n) const;
};

/// Phi(u; y) = 1/2 sum_i (y_i - G(u)_i)^2 / s_i for a diagonal covariance s.
struct GaussianAdditivePotential {
  enum class Envelopes {
    derived,  // rigorous bounds from the forward map and covariance
    growth,   // M1 = sigma- c- log+ t, M2 = log(r + c+ t^kappa), up to additive constants
  };

  ForwardMap forward = ForwardMap::identity();
  std::vector<double> noise_variance{1.0};
  Envelopes envelopes = Envelopes::derived;

  double sigma_minus() const;  // smallest eigenvalue of the inverse covariance
  double sigma_plus() const;   // largest eigenvalue of the inverse covariance

  /// Throws InvalidSpec on non-positive variances or inconsistent shapes.
  void validate() const;
  PotentialSpec spec() const;
};

/// Phi evaluated on every sample of the ensemble.  Throws DimensionMismatch.
std::vector<double> evaluate_misfit_batch(const PotentialSpec& potential,
                                          const FieldEnsemble& ensemble,
                                          std::span<const double> y);

/// ||u_i|| for every sample in the potential's norm.
std::vector<double> sample_norms(const PotentialSpec& potential, const FieldEnsemble& ensemble);

/// Identifier for measures built on this ensemble.
std::uint64_t reference_id(const FieldEnsemble& ensemble);

struct NormalizationEstimate {
  double z = 0.0;           // may underflow; log_z does not
  double std_error = 0.0;
  double log_z = 0.0;
  double log_shift = 0.0;   // max_i -Phi_i, removed before exponentiation
  double ess = 0.0;
  bool underflow = false;   // z not representable at the recorded shift
};

/// Mean of exp(-Phi).  Throws DegenerateWeights when the ESS is below 10.
NormalizationEstimate normalization_constant(const PotentialSpec& potential,
                                             const FieldEnsemble& ensemble,
                                             std::span<const double> y);
NormalizationEstimate normalization_from_misfit(std::span<const double> misfit);

struct PosteriorEstimate {
  std::vector<double> y;
  NormalizationEstimate normalization;
  WeightedSampleMeasure measure;
  double ess = 0.0;

  /// Normalized weight of sample i; the weights sum to one.
  double weight(std::size_t i) const { return measure.normalized(i); }
};

PosteriorEstimate posterior(const PotentialSpec& potential, const FieldEnsemble& ensemble,
                            std::span<const double> y);

/// Posterior for misfit + perturbation, with the log-weights assembled as
/// -(Phi_i - min Phi) - (D_i - min D): a perturbation constant over the
/// sample then reproduces the unperturbed weights bit for bit.
PosteriorEstimate posterior_from_terms(std::uint64_t reference, std::span<const double> y,
                                       std::span<const double> misfit,
                                       std::span<const double> perturbation = {});

/// Self-normalized sum_i w_i f_i with a delta-method standard error.
MeanEstimate posterior_expectation(std::span<const double> f_values,
                                   const PosteriorEstimate& posterior);

// --- integrability -------------------------------------------------------------

struct IntegrabilityEstimate {
  MeanEstimate estimate;
  std::vector<std::size_t> prefix_sizes;  // n, n/2, n/4, ... (>= 1000)
  std::vector<double> prefix_means;
  bool unstable = false;  // consecutive prefix means differ by more than 20%
};

struct IntegrabilityReport {
  double r = 0.0;
  IntegrabilityEstimate s1;   // E exp(-M1)
  IntegrabilityEstimate s12;  // E exp(2 M2 - M1)
  IntegrabilityEstimate s13;  // E exp(2 M3 - M1)
  bool divergence_flag = false;
};

/// Estimates from the envelopes only; M2 and M3 default to zero when absent.
IntegrabilityReport integrability_estimates(const PotentialSpec& potential,
                                            const FieldEnsemble& ensemble, double r);
IntegrabilityEstimate running_mean_estimate(std::span<const double> terms);

// --- assumption probes ---------------------------------------------------------

struct ProbeReport {
  std::size_t probes = 0;
  double max_abs_misfit = 0.0;       // over the r-ball, against M0(r)
  double min_lower_gap = 0.0;        // min Phi - M1
  double max_lipschitz_ratio = 0.0;  // max |dPhi| / (exp(M2) |dy|)
  bool bounded = false;
  bool lower_holds = false;
  bool lipschitz_holds = false;
};

/// Random (u, y) probes with u, y uniform in the r-balls (directions
/// Gaussian, radii uniform); u has length `input_dim`.
ProbeReport probe_assumptions(const PotentialSpec& potential, double r, std::size_t input_dim,
                              std::size_t data_dim, std::uint64_t seed,
                              std::size_t n_probes = 1000);

// --- well-posedness sweeps -------------------------------------------------------

struct SweepPoint {
  double perturbation = 0.0;  // epsilon or Psi(N)
  double parameter = 0.0;     // epsilon or N
  DistanceEstimate hellinger;
  double total_variation = 0.0;
  bool kraft_holds = false;   // TV <= d_H <= sqrt 2
  bool gap_holds = false;     // expectation bound for every indicator probe
};

struct WellPosednessReport {
  std::string kind;  // "data" or "likelihood"
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::optional<IntegrabilityReport> integrability;
  std::vector<SweepPoint> points;
  std::optional<LinearFit> fit;  // log d_H against log perturbation
  std::map<std::string, std::string> verdicts;
};

struct SweepOptions {
  double radius = kInfinityNorm;  // data must stay inside ||y|| < radius
  bool with_integrability = true;
};

/// d_H(mu^y, mu^{y + eps direction}) on the shared ensemble for each eps.
WellPosednessReport data_lipschitz_sweep(const PotentialSpec& potential,
                                         const FieldEnsemble& ensemble,
                                         std::span<const double> y,
                                         std::span<const double> epsilons,
                                         std::span<const double> direction,
                                         const SweepOptions& options = {});

struct ZLipschitzCheck {
  std::vector<double> epsilons;
  std::vector<double> ratios;  // |Z(y) - Z(y + eps e)| / eps
  bool holds = false;          // no ratio exceeds 1.5 times the largest-eps ratio
};

/// Direction defaults to the first coordinate axis.
ZLipschitzCheck z_lipschitz_check(const PotentialSpec& potential, const FieldEnsemble& ensemble,
                                  std::span<const double> y, std::span<const double> epsilons,
                                  std::span<const double> direction = {});

/// Phi_N = Phi + Psi(N) h(u, ||u||).
struct PerturbationFamily {
  enum class Kind { none, sine_norm, constant, custom };

  Kind kind = Kind::sine_norm;
  double constant = 1.0;
  std::function<double(std::span<const double> u, double norm)> custom;

  static PerturbationFamily none() { return {Kind::none, 0.0, {}}; }
  static PerturbationFamily sine_norm() { return {Kind::sine_norm, 0.0, {}}; }
  static PerturbationFamily constant_shift(double c) { return {Kind::constant, c, {}}; }

  double operator()(std::span<const double> u, double norm) const;
  const char* name() const;
};

double inverse_rate(std::size_t n);  // Psi(N) = 1/N

WellPosednessReport likelihood_perturbation_sweep(
    const PotentialSpec& potential, const PerturbationFamily& family,
    const std::function<double(std::size_t)>& psi, const FieldEnsemble& ensemble,
    std::span<const double> y, std::span<const std::size_t> n_list,
    const SweepOptions& options = {});

std::string to_json_text(const WellPosednessReport& report);
/// Columns perturbation, parameter, d_H, stderr, tv.
void write_sweep_csv(const std::string& path, const WellPosednessReport& report,
                     std::uint64_t config_hash);

// --- growth trade-off ----------------------------------------------------------------

struct GrowthVerdict {
  bool admissible = false;
  double exponent = 0.0;  // 2 kappa - sigma- c-
  double margin = 0.0;    // p - exponent
};

/// Admissible iff 2 kappa - sigma- c- <= p.  Throws InvalidMomentOrder if
/// p >= alpha and OutOfRange on negative inputs.
GrowthVerdict growth_admissibility(double kappa, double c_minus, double sigma_minus, double p,
                                   double alpha);
const char* to_string(const GrowthVerdict& v);

}  // namespace stableinfer
