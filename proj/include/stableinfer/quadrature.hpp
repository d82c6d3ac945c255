#pragma once

#include <functional>

namespace stableinfer {

/// Tolerances shared by every quadrature in the library.
struct QuadratureSettings {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  unsigned max_depth = 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Adaptive quadrature over [a, b]; either bound may be infinite.  Finite
/// ranges use adaptive Gauss-Kronrod, half-lines use exp-sinh.  Throws
/// QuadratureFailure if the estimate is not finite.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSettings& settings = {});

/// Tanh-sinh quadrature on a finite [a, b]; tolerates integrable endpoint
/// singularities.
QuadratureResult integrate_singular(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureSettings& settings = {});

/// Convenience: value only.
double integrate_value(const std::function<double(double)>& f, double a, double b,
                       const QuadratureSettings& settings = {});

}  // namespace stableinfer
