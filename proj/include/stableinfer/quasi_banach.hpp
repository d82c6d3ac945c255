#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace stableinfer {

/// max(1, 2^(1/q - 1)); 1 for q = infinity.
double quasi_triangle_constant(double q);

/// l^q (sequence) or grid-quadrature L^q (grid function with spacing h).
struct QuasiNormSpec {
  enum class Domain { sequence, grid };

  double q = 2.0;
  Domain domain = Domain::sequence;
  double spacing = 1.0;

  static QuasiNormSpec sequence(double q);
  static QuasiNormSpec grid(double q, double spacing);

  double triangle_constant() const { return quasi_triangle_constant(q); }
};

inline constexpr double kInfinityNorm = std::numeric_limits<double>::infinity();

/// (sum |v_i|^q)^(1/q), times spacing^(1/q) on grids; max |v_i| for q = inf.
double quasi_norm(std::span<const double> values, const QuasiNormSpec& spec);

/// Empirical measure on a fixed reference sample with non-negative weights.
/// `log_shift` records the constant removed from the log-weights before
/// exponentiation; it cancels in every normalized quantity.
class WeightedSampleMeasure {
 public:
  WeightedSampleMeasure(std::uint64_t reference_id, std::vector<double> weights,
                        double log_shift = 0.0);

  /// Weights exp(log_weights - max) with the shift recorded.
  static WeightedSampleMeasure from_log_weights(std::uint64_t reference_id,
                                                std::span<const double> log_weights);

  std::uint64_t reference_id() const noexcept { return reference_id_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double log_shift() const noexcept { return log_shift_; }
  /// Mean unnormalized weight (the plug-in normalization constant).
  double mean_weight() const noexcept { return mean_; }
  double normalized(std::size_t i) const { return weights_[i] / (mean_ * double(size())); }
  /// (sum w)^2 / sum w^2.
  double effective_sample_size() const;

 private:
  std::uint64_t reference_id_;
  std::vector<double> weights_;
  double log_shift_;
  double mean_ = 0.0;
};

struct DistanceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// sqrt((1/n) sum_i (sqrt(w_i / W) - sqrt(v_i / V))^2), W, V mean weights.
/// Throws MismatchedReference.
double hellinger_empirical(const WeightedSampleMeasure& mu, const WeightedSampleMeasure& nu);
/// Same estimate with a delta-method standard error.
DistanceEstimate hellinger_with_error(const WeightedSampleMeasure& mu,
                                      const WeightedSampleMeasure& nu);

/// (1/2) (1/n) sum_i |w_i / W - v_i / V|.
double total_variation_empirical(const WeightedSampleMeasure& mu, const WeightedSampleMeasure& nu);

struct ExpectationGap {
  double lhs = 0.0;          // |E_mu f - E_nu f|
  double rhs = 0.0;          // sqrt 2 sqrt(E_mu f^2 + E_nu f^2) d_H
  double sup_bound = 0.0;    // 2 sup|f| d_H
  bool holds = false;        // lhs <= rhs + tolerance
  bool sup_holds = false;    // lhs <= sup_bound + tolerance
};

/// Checks the Hellinger expectation bound for f evaluated on the shared
/// reference sample; `tolerance` absorbs Monte Carlo error.
ExpectationGap expectation_gap_bound_check(std::span<const double> f_values,
                                           const WeightedSampleMeasure& mu,
                                           const WeightedSampleMeasure& nu,
                                           double tolerance = 0.0);

/// Self-normalized expectation sum_i w_i f_i / sum_i w_i.
double weighted_mean(std::span<const double> f_values, const WeightedSampleMeasure& mu);

}  // namespace stableinfer
