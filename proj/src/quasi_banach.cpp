#include "stableinfer/quasi_banach.hpp"

#include <algorithm>
#include <cmath>

#include "stableinfer/errors.hpp"
#include "stableinfer/parallel.hpp"

namespace stableinfer {
namespace {

void check_pair(const WeightedSampleMeasure& mu, const WeightedSampleMeasure& nu) {
  if (mu.reference_id() != nu.reference_id() || mu.size() != nu.size())
    throw MismatchedReference("measures must share one reference sample");
  if (mu.size() == 0) throw DegenerateWeights("empty reference sample");
}

// Elementwise map then deterministic sum.
template <class F>
double mapped_sum(std::size_t n, F f) {
  std::vector<double> terms(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) terms[i] = f(i);
  });
  return deterministic_sum(terms);
}

}  // namespace

double quasi_triangle_constant(double q) {
  if (!(q > 0.0)) throw OutOfRange("q", "quasi-norm exponent must be > 0");
  if (std::isinf(q)) return 1.0;
  return std::max(1.0, std::pow(2.0, 1.0 / q - 1.0));
}

QuasiNormSpec QuasiNormSpec::sequence(double q) {
  quasi_triangle_constant(q);
  return {q, Domain::sequence, 1.0};
}

QuasiNormSpec QuasiNormSpec::grid(double q, double spacing) {
  quasi_triangle_constant(q);
  if (!(spacing > 0.0)) throw OutOfRange("spacing", "grid spacing must be > 0");
  return {q, Domain::grid, spacing};
}

double quasi_norm(std::span<const double> v, const QuasiNormSpec& spec) {
  if (!(spec.q > 0.0)) throw OutOfRange("q", "quasi-norm exponent must be > 0");
  if (std::isinf(spec.q)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  // Factor out the largest entry so that small q neither overflows nor
  // underflows; this also makes |a| ||u|| = ||a u|| hold to rounding.
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return 0.0;
  std::vector<double> terms(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) terms[i] = std::pow(std::abs(v[i]) / m, spec.q);
  double s = deterministic_sum(terms);
  if (spec.domain == QuasiNormSpec::Domain::grid) s *= spec.spacing;
  return m * std::pow(s, 1.0 / spec.q);
}

WeightedSampleMeasure::WeightedSampleMeasure(std::uint64_t reference_id,
                                             std::vector<double> weights, double log_shift)
    : reference_id_(reference_id), weights_(std::move(weights)), log_shift_(log_shift) {
  for (double w : weights_)
    if (!(w >= 0.0) || !std::isfinite(w)) throw DegenerateWeights("weights must be finite and >= 0");
  mean_ = deterministic_mean(weights_);
}

WeightedSampleMeasure WeightedSampleMeasure::from_log_weights(std::uint64_t reference_id,
                                                              std::span<const double> lw) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : lw) top = std::max(top, x);
  if (!std::isfinite(top)) throw DegenerateWeights("no finite log-weight");
  std::vector<double> w(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) w[i] = std::exp(lw[i] - top);
  return WeightedSampleMeasure(reference_id, std::move(w), top);
}

double WeightedSampleMeasure::effective_sample_size() const {
  std::vector<double> sq(weights_.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = weights_[i] * weights_[i];
  const double s2 = deterministic_sum(sq);
  if (s2 == 0.0) return 0.0;
  const double s1 = mean_ * static_cast<double>(size());
  return s1 * s1 / s2;
}

double hellinger_empirical(const WeightedSampleMeasure& mu, const WeightedSampleMeasure& nu) {
  return hellinger_with_error(mu, nu).value;
}

DistanceEstimate hellinger_with_error(const WeightedSampleMeasure& mu,
                                      const WeightedSampleMeasure& nu) {
  check_pair(mu, nu);
  const std::size_t n = mu.size();
  const double W = mu.mean_weight();
  const double V = nu.mean_weight();
  if (!(W > 0.0) || !(V > 0.0)) throw DegenerateWeights("a measure has zero total weight");
  const auto& w = mu.weights();
  const auto& v = nu.weights();
  const double h2 = mapped_sum(n, [&](std::size_t i) {
                      const double d = std::sqrt(w[i] / W) - std::sqrt(v[i] / V);
                      return d * d;
                    }) /
                    static_cast<double>(n);
  DistanceEstimate out;
  out.value = std::sqrt(std::max(0.0, h2));
  if (out.value == 0.0 || n < 2) return out;
  // H^2 = 2 - 2 rho with rho = mean sqrt(w v) / sqrt(W V).
  const double M = mapped_sum(n, [&](std::size_t i) { return std::sqrt(w[i] * v[i]); }) /
                   static_cast<double>(n);
  const double root = std::sqrt(W * V);
  const double rho = M / root;
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i)
    psi[i] = (std::sqrt(w[i] * v[i]) - M) / root - 0.5 * rho * ((w[i] - W) / W + (v[i] - V) / V);
  const double var = mapped_sum(n, [&](std::size_t i) { return psi[i] * psi[i]; }) /
                     static_cast<double>(n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(n)) / out.value;
  return out;
}

double total_variation_empirical(const WeightedSampleMeasure& mu, const WeightedSampleMeasure& nu) {
  check_pair(mu, nu);
  const double W = mu.mean_weight();
  const double V = nu.mean_weight();
  if (!(W > 0.0) || !(V > 0.0)) throw DegenerateWeights("a measure has zero total weight");
  const auto& w = mu.weights();
  const auto& v = nu.weights();
  return 0.5 * mapped_sum(mu.size(), [&](std::size_t i) { return std::abs(w[i] / W - v[i] / V); }) /
         static_cast<double>(mu.size());
}

double weighted_mean(std::span<const double> f, const WeightedSampleMeasure& mu) {
  if (f.size() != mu.size()) throw DimensionMismatch("f must be evaluated on the reference sample");
  const auto& w = mu.weights();
  const double num = mapped_sum(f.size(), [&](std::size_t i) { return w[i] * f[i]; });
  return num / (mu.mean_weight() * static_cast<double>(mu.size()));
}

ExpectationGap expectation_gap_bound_check(std::span<const double> f, const WeightedSampleMeasure& mu,
                                           const WeightedSampleMeasure& nu, double tolerance) {
  check_pair(mu, nu);
  std::vector<double> f2(f.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    f2[i] = f[i] * f[i];
    sup = std::max(sup, std::abs(f[i]));
  }
  const double dh = hellinger_empirical(mu, nu);
  ExpectationGap g;
  g.lhs = std::abs(weighted_mean(f, mu) - weighted_mean(f, nu));
  g.rhs = std::sqrt(2.0) * std::sqrt(weighted_mean(f2, mu) + weighted_mean(f2, nu)) * dh;
  g.sup_bound = 2.0 * sup * dh;
  g.holds = g.lhs <= g.rhs + tolerance;
  g.sup_holds = g.lhs <= g.sup_bound + tolerance;
  return g;
}

}  // namespace stableinfer
