#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stableinfer/basis.hpp"
#include "stableinfer/sequences.hpp"
#include "stableinfer/stable_core.hpp"

namespace stableinfer {

/// u = sum_n u_n psi_n with independent u_n ~ S(alpha, beta_n, gamma_n, delta_n; 0).
struct StableFieldSpec {
  double alpha = 1.0;
  CoefficientSequence beta = CoefficientSequence::zero();
  CoefficientSequence gamma = CoefficientSequence::power_law(1.0, 2.0);
  CoefficientSequence delta = CoefficientSequence::zero();
  BasisSpec basis = BasisSpec::euclidean(1.0);
  std::size_t truncation = 64;  // ignored by wavelet bases, which use all levels 0..J

  std::size_t coefficient_count() const { return basis.coefficient_count(truncation); }
  /// Law of coefficient n (1-based); throws InvalidSpec on invalid entries.
  StableParams coefficient_law(std::size_t n) const;
  /// Throws InvalidSpec.
  void validate() const;
  std::string describe() const;
  std::uint64_t hash() const;
};

/// A seeded batch of coefficient vectors with optional grid syntheses.
/// Coefficient n of sample i is drawn from Stream(stream_key(seed, i, n)).
struct FieldEnsemble {
  std::uint64_t spec_hash = 0;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::size_t n_coeffs = 0;
  std::size_t grid_size = 0;
  std::vector<double> coefficients;  // n_samples x n_coeffs, row-major
  std::vector<double> grid;          // n_samples x grid_size, row-major (may be empty)
  std::vector<std::string> warnings;

  std::span<const double> sample(std::size_t i) const {
    return {coefficients.data() + i * n_coeffs, n_coeffs};
  }
  std::span<const double> field(std::size_t i) const {
    return {grid.data() + i * grid_size, grid_size};
  }
  /// Column n (0-based) of the coefficient matrix.
  std::vector<double> column(std::size_t n) const;
};

FieldEnsemble sample_coefficients(const StableFieldSpec& spec, std::size_t n_samples,
                                  std::uint64_t seed);

/// Fills ensemble.grid by synthesizing every sample in `basis`.
void synthesize_ensemble(const BasisSpec& basis, FieldEnsemble& ensemble);

// --- Figure 2 -------------------------------------------------------------

enum class CoefficientFamily { cauchy, gaussian };
const char* to_string(CoefficientFamily f);

/// (j + 1)^-2 2^-j.
double figure2_scale(unsigned j);

struct Figure2Ensemble {
  FieldEnsemble ensemble;       // grid rescaled to [0, 1] with one global affine map
  double max_abs_coefficient = 0.0;
  double raw_min = 0.0;
  double raw_max = 0.0;
};

/// Coefficient (j, k) of sample i is scale(j) x / z (Cauchy) or scale(j) x
/// (Gaussian), with the same standard normals x, z from substream
/// (seed, i, n) in both families.
Figure2Ensemble figure2_ensemble(CoefficientFamily family, unsigned J, std::size_t n_samples,
                                 std::uint64_t seed, BasisSpec basis = BasisSpec::haar(10));

/// The base normal pair (x, z) behind coefficient n of sample i.
std::pair<double, double> figure2_base_draws(std::uint64_t seed, std::size_t sample, std::size_t n);

// --- summability ------------------------------------------------------------

enum class OrliczRegime { alpha_eq_q, alpha_eq_2q, neither };
enum class SummabilityVerdict { satisfies, fails_ell_alpha, fails_orlicz, inconclusive };
const char* to_string(OrliczRegime r);
const char* to_string(SummabilityVerdict v);

struct SummabilityReport {
  std::vector<std::size_t> depths;     // doubling depths
  std::vector<double> ell_alpha_sums;  // sum_{n <= depth} gamma_n^alpha
  std::vector<double> orlicz_sums;     // sum_{n <= depth} |gamma_n^alpha log gamma_n|
  PowerLogForm tail;                   // exact or fitted decay C n^-r (log n)^-s
  double fit_residual = 0.0;
  bool analytic = false;
  OrliczRegime regime = OrliczRegime::neither;
  Summability ell_alpha = Summability::inconclusive;
  Summability orlicz = Summability::inconclusive;
  SummabilityVerdict verdict = SummabilityVerdict::inconclusive;
};

/// Closed-form sequences are judged by the integral test unless
/// `force_numeric`, in which case the decay is fitted from the entries.
SummabilityReport summability_report(const CoefficientSequence& gamma, double alpha, double q,
                                     std::size_t probe_depth, bool force_numeric = false);

// --- three series -----------------------------------------------------------

enum class SeriesVerdict { convergent, divergent, inconclusive };
const char* to_string(SeriesVerdict v);

/// P[x > A], E[x 1[x <= A]], E[x^2 1[x <= A]] for x = |gamma u|^q, u standardized.
struct ThreeSeriesTerms {
  double p_exceed = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

/// Terms for one coefficient.  The alpha = 1, beta = 0, q = 1 case uses the
/// closed Cauchy forms; otherwise `table` must hold orders {q, 2q}.
ThreeSeriesTerms three_series_terms(double gamma, double q, double A,
                                    const TruncatedMomentTable* table);

struct ThreeSeriesResult {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  std::vector<std::size_t> depths;
  std::vector<std::array<double, 3>> partial_sums;
  std::array<SeriesVerdict, 3> per_series{SeriesVerdict::inconclusive, SeriesVerdict::inconclusive,
                                          SeriesVerdict::inconclusive};
  SeriesVerdict verdict = SeriesVerdict::inconclusive;
  /// Finite-depth numeric diagnostic, not a proof of convergence.
  std::string note;
};

/// Kolmogorov three-series diagnostic for x_n = |gamma_n u_n|^q, u_n
/// standardized S(alpha, beta; 0).
///
/// Per series, with increments I_j between consecutive doubling depths:
///   Convergent  if the last three I_j are <= 1e-6, or their ratios are <= 0.9;
///   Divergent   if the partial sum grew by > 10% per doubling three times running;
///   otherwise the fitted decay of gamma_n decides through the term's class
///   (gamma^alpha for the tail series, gamma^m, gamma^alpha |log gamma| or
///   gamma^alpha for a truncated moment of order m below, at or above alpha).
ThreeSeriesResult three_series_check(const CoefficientSequence& gamma, double alpha, double q,
                                     double A, std::size_t depth, double beta = 0.0);

// --- Hilbert scales and shifts -----------------------------------------------

struct HilbertScaleVerdict {
  Summability gamma_condition = Summability::inconclusive;  // (gamma_n / lambda_n^s) in l^alpha
  Summability delta_condition = Summability::inconclusive;  // (delta_n / lambda_n^s) in l^2
  bool member = false;
};

HilbertScaleVerdict hilbert_scale_membership(const CoefficientSequence& gamma,
                                             const CoefficientSequence& delta,
                                             const CoefficientSequence& lambda, double s,
                                             double alpha, std::size_t probe_depth);

/// (h_n / gamma_n) in l^2.  Throws DivisionByZeroScale if some h_n != 0 has
/// gamma_n = 0 within the probe depth.
Summability cameron_martin_shift_admissible(const CoefficientSequence& h,
                                            const CoefficientSequence& gamma,
                                            std::size_t probe_depth);

// --- moments and frames ---------------------------------------------------------

/// Norm of the partial sum sum_{n <= m} v_n psi_n in the basis's space:
/// l^q of coefficients (sequence), l^q of lambda_n^-s v_n (eigenbasis), or
/// grid L^q of the synthesis (wavelets).
double series_norm(const BasisSpec& basis, std::span<const double> coefficients, double q,
                   std::size_t m);

struct FlomTracePoint {
  std::size_t truncation = 0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct FlomResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<FlomTracePoint> trace;  // truncations N/4, N/2, N
};

/// Monte Carlo E[||u||^p], 0 < p <= q, p < alpha; throws MomentOrderTooHigh.
FlomResult flom_estimate(const FieldEnsemble& ensemble, const StableFieldSpec& spec, double p,
                         double q);

struct QFrameCheck {
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  bool orthonormal_case = false;  // q = 2 with an orthonormal basis
  bool holds = false;             // ratio <= 1 + 1e-3 (orthonormal) or finite
};

/// ||sum v_n psi_n|| / ||v||_{l^q} over random Gaussian coefficient vectors.
QFrameCheck qframe_upper_check(const BasisSpec& basis, double q, std::size_t n_trials,
                               std::uint64_t seed, std::size_t truncation = 64);

}  // namespace stableinfer
