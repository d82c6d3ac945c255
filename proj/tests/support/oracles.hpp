#pragma once

// Independent reference computations for the tests.  Nothing here calls
// into the library's own quadrature or samplers.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

/// Adaptive Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
               int depth = 50);

/// int_0^inf f via x = t / (1 - t).
double simpson_half_line(const std::function<double(double)>& f, double tol = 1e-12);

double cauchy_cdf(double delta, double gamma, double x);
double cauchy_pdf(double delta, double gamma, double x);
double normal_pdf(double mean, double sd, double x);

/// P[|X| >= A], E[|X| 1[|X| < A]], E[X^2 1[|X| < A]] for X ~ C(0, gamma),
/// by numerical integration of the density.
struct Truncated {
  double p_exceed, m1, m2;
};
Truncated truncated_cauchy_by_quadrature(double gamma, double A);

/// KL(N(0,1) || C(0,1)) by direct integration on a wide interval.
double kl_normal_cauchy();

/// E|X|^p closed forms.
double cauchy_abs_moment(double gamma, double p);
double normal_abs_moment(double sd, double p);

/// Conjugate scalar model: u ~ N(0, 1), y | u ~ N(u, 1).
double conjugate_evidence(double y);
double conjugate_evidence_slope(double y);
/// Hellinger (no 1/2 factor) between N(m1, v) and N(m2, v).
double gaussian_hellinger_equal_var(double m1, double m2, double var);

/// 1/2 (y - u)^2 summed, written as a plain loop.
double gaussian_misfit(std::span<const double> gu, std::span<const double> y,
                       std::span<const double> var);

/// Haar mother wavelet psi_{j,k}(x) = 2^(j/2) psi(2^j x - k).
double haar(unsigned j, std::size_t k, double x);

}  // namespace oracle
