#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stableinfer {

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical values, c(level) = sqrt(-log(level / 2) / 2).
double ks_critical_value(std::size_t n, double level = 0.01);
double ks_two_sample_critical_value(std::size_t n, std::size_t m, double level = 0.01);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and its standard error (deterministic summation order).
MeanEstimate mean_and_stderr(std::span<const double> values);

/// Ordinary least squares y = intercept + slope * x with a two-sided
/// Student-t confidence interval on the slope.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  double residual_rms = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y, double confidence = 0.95);

/// Least squares for a small dense design (rows of `design` are observations).
std::vector<double> least_squares(const std::vector<std::vector<double>>& design,
                                  std::span<const double> y, double* residual_rms = nullptr);

/// Sample median.
double median(std::vector<double> values);

double normal_cdf(double x);

}  // namespace stableinfer
