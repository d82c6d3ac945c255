#include "support/oracles.hpp"

#include <cmath>

namespace oracle {
namespace {

constexpr double kPi = 3.14159265358979323846;

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  // Split the range first so narrow features are not missed.
  constexpr int kPieces = 64;
  double total = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    const double lo = a + (b - a) * i / kPieces;
    const double hi = a + (b - a) * (i + 1) / kPieces;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(f, lo, hi, fa, fm, fb, whole, tol / kPieces, depth);
  }
  return total;
}

double simpson_half_line(const std::function<double(double)>& f, double tol) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double x = t / (1.0 - t);
    return f(x) / ((1.0 - t) * (1.0 - t));
  };
  return simpson(g, 0.0, 1.0 - 1e-12, tol);
}

double cauchy_cdf(double delta, double gamma, double x) {
  return 0.5 + std::atan((x - delta) / gamma) / kPi;
}

double cauchy_pdf(double delta, double gamma, double x) {
  const double z = (x - delta) / gamma;
  return 1.0 / (kPi * gamma * (1.0 + z * z));
}

double normal_pdf(double mean, double sd, double x) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

Truncated truncated_cauchy_by_quadrature(double gamma, double A) {
  auto f = [gamma](double x) { return 2.0 * cauchy_pdf(0.0, gamma, x); };
  Truncated t{};
  const double inside = simpson(f, 0.0, A, 1e-14);
  t.p_exceed = 1.0 - inside;
  t.m1 = simpson([&](double x) { return x * f(x); }, 0.0, A, 1e-14);
  t.m2 = simpson([&](double x) { return x * x * f(x); }, 0.0, A, 1e-14);
  return t;
}

double kl_normal_cauchy() {
  auto f = [](double x) {
    const double p = normal_pdf(0.0, 1.0, x);
    if (p == 0.0) return 0.0;
    return p * (std::log(p) - std::log(cauchy_pdf(0.0, 1.0, x)));
  };
  return simpson(f, -40.0, 40.0, 1e-13);
}

double cauchy_abs_moment(double gamma, double p) { return std::pow(gamma, p) / std::cos(p * kPi / 2.0); }

double normal_abs_moment(double sd, double p) {
  return std::pow(sd, p) * std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(kPi);
}

double conjugate_evidence(double y) { return std::exp(-y * y / 4.0) / (2.0 * std::sqrt(kPi)); }

double conjugate_evidence_slope(double y) { return -0.5 * y * conjugate_evidence(y); }

double gaussian_hellinger_equal_var(double m1, double m2, double var) {
  const double d = m1 - m2;
  return std::sqrt(2.0 * (1.0 - std::exp(-d * d / (8.0 * var))));
}

double gaussian_misfit(std::span<const double> gu, std::span<const double> y,
                       std::span<const double> var) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - gu[i]) * (y[i] - gu[i]) / var[i];
  return s / 2.0;
}

double haar(unsigned j, std::size_t k, double x) {
  const double s = std::ldexp(1.0, static_cast<int>(j));
  const double t = s * x - static_cast<double>(k);
  if (t < 0.0 || t >= 1.0) return 0.0;
  return std::sqrt(s) * (t < 0.5 ? 1.0 : -1.0);
}

}  // namespace oracle
