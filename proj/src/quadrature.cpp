#include "stableinfer/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "stableinfer/errors.hpp"

namespace stableinfer {
namespace {

using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

QuadratureResult finite_range(const std::function<double(double)>& f, double a, double b,
                              const QuadratureSettings& s) {
  double l1 = 0.0;
  double err = 0.0;
  const double coarse = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err, &l1);
  // Translate the absolute tolerance into the L1-relative one boost uses.
  const double scale = std::max(l1, std::numeric_limits<double>::min());
  const double tol = std::max(s.rel_tol, s.abs_tol / scale);
  if (l1 == 0.0 && coarse == 0.0 && err == 0.0) return {0.0, 0.0, true};
  const double v = gauss_kronrod<double, 31>::integrate(f, a, b, s.max_depth, tol, &err, &l1);
  return {v, err, err <= std::max(s.abs_tol, s.rel_tol * std::abs(v)) * 10.0};
}

QuadratureResult upper_half_line(const std::function<double(double)>& f, double a,
                                 const QuadratureSettings& s) {
  thread_local exp_sinh<double> integrator(12);
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  const double v = integrator.integrate(
      f, a, std::numeric_limits<double>::infinity(), s.rel_tol, &err, &l1, &levels);
  return {v, err, err <= std::max(s.abs_tol, s.rel_tol * std::abs(v)) * 10.0};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSettings& settings) {
  if (a == b) return {};
  if (a > b) {
    auto r = integrate(f, b, a, settings);
    r.value = -r.value;
    return r;
  }
  QuadratureResult r;
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (!lo_inf && !hi_inf) {
    r = finite_range(f, a, b, settings);
  } else if (!lo_inf) {
    r = upper_half_line(f, a, settings);
  } else if (!hi_inf) {
    r = upper_half_line([&f](double x) { return f(-x); }, -b, settings);
  } else {
    const auto right = upper_half_line(f, 0.0, settings);
    const auto left = upper_half_line([&f](double x) { return f(-x); }, 0.0, settings);
    r = {right.value + left.value, right.error + left.error, right.converged && left.converged};
  }
  if (!std::isfinite(r.value)) throw QuadratureFailure("quadrature produced a non-finite value");
  return r;
}

QuadratureResult integrate_singular(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureSettings& settings) {
  if (a == b) return {};
  if (!std::isfinite(a) || !std::isfinite(b)) return integrate(f, a, b, settings);
  thread_local tanh_sinh<double> integrator(15);
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  const double v = integrator.integrate(f, a, b, settings.rel_tol, &err, &l1, &levels);
  if (!std::isfinite(v)) throw QuadratureFailure("quadrature produced a non-finite value");
  return {v, err, err <= std::max(settings.abs_tol, settings.rel_tol * std::abs(v)) * 10.0};
}

double integrate_value(const std::function<double(double)>& f, double a, double b,
                       const QuadratureSettings& settings) {
  return integrate(f, a, b, settings).value;
}

}  // namespace stableinfer
