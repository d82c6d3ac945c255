#include "stableinfer/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stableinfer/errors.hpp"
#include "stableinfer/parallel.hpp"

namespace stableinfer {

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_critical_value(std::size_t n, double level) {
  return std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(static_cast<double>(n));
}

double ks_two_sample_critical_value(std::size_t n, std::size_t m, double level) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((nn + mm) / (nn * mm));
}

MeanEstimate mean_and_stderr(std::span<const double> values) {
  if (values.empty()) return {};
  const double mean = deterministic_mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double n = static_cast<double>(values.size());
  const double var = values.size() > 1 ? deterministic_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y, double confidence) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionMismatch("fit_line needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.residual_rms = std::sqrt(ssr / n);
  if (x.size() > 2) {
    const double dof = n - 2.0;
    fit.slope_stderr = std::sqrt(ssr / dof / sxx);
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    fit.slope_ci_low = fit.slope - t * fit.slope_stderr;
    fit.slope_ci_high = fit.slope + t * fit.slope_stderr;
  } else {
    fit.slope_ci_low = fit.slope_ci_high = fit.slope;
  }
  return fit;
}

std::vector<double> least_squares(const std::vector<std::vector<double>>& design,
                                  std::span<const double> y, double* residual_rms) {
  if (design.size() != y.size() || design.empty()) throw DimensionMismatch("least_squares: row count");
  const std::size_t p = design.front().size();
  // Normal equations with column scaling, solved by Gaussian elimination
  // with partial pivoting; designs here are tiny (p <= 4).
  std::vector<double> scale(p, 0.0);
  for (const auto& row : design)
    for (std::size_t j = 0; j < p; ++j) scale[j] = std::max(scale[j], std::abs(row[j]));
  for (auto& s : scale) s = s > 0.0 ? s : 1.0;
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < design.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = design[i][j] / scale[j];
      for (std::size_t k = 0; k < p; ++k) a[j][k] += xj * design[i][k] / scale[k];
      a[j][p] += xj * y[i];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    if (a[c][c] == 0.0) throw NumericError("least_squares: singular design");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = a[j][p] / a[j][j] / scale[j];
  if (residual_rms) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < design.size(); ++i) {
      double fit = 0.0;
      for (std::size_t j = 0; j < p; ++j) fit += design[i][j] * beta[j];
      ssr += (y[i] - fit) * (y[i] - fit);
    }
    *residual_rms = std::sqrt(ssr / static_cast<double>(design.size()));
  }
  return beta;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace stableinfer
