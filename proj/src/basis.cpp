#include "stableinfer/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stableinfer/errors.hpp"

namespace stableinfer {
namespace {

double haar(double x) {
  if (x < 0.0 || x >= 1.0) return 0.0;
  return x < 0.5 ? 1.0 : -1.0;
}

double hat(double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  return 1.0 - std::abs(2.0 * x - 1.0);
}

template <class Mother>
void synthesize_wavelet(unsigned J, double norm, std::span<const double> c, std::span<double> out,
                        Mother psi) {
  const std::size_t g = out.size();
  const double gd = static_cast<double>(g);
  std::fill(out.begin(), out.end(), 0.0);
  for (unsigned j = 0; j <= J; ++j) {
    const std::size_t count = std::size_t{1} << j;
    const double width = 1.0 / static_cast<double>(count);
    const double amp = norm * std::sqrt(static_cast<double>(count));
    for (std::size_t k = 0; k < count; ++k) {
      const double coef = c[wavelet_index(j, k) - 1];
      if (coef == 0.0) continue;
      const double a = static_cast<double>(k) * width;
      // Grid points (i + 1/2) / g inside [a, a + width].
      const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(a * gd - 0.5)));
      const auto stop =
          std::min(g, static_cast<std::size_t>(std::max(0.0, std::ceil((a + width) * gd - 0.5))));
      for (std::size_t i = first; i < stop; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / gd;
        out[i] += coef * amp * psi(x * static_cast<double>(count) - static_cast<double>(k));
      }
    }
  }
}

}  // namespace

bool BasisSpec::is_wavelet() const noexcept {
  return std::holds_alternative<HaarWavelet>(kind) || std::holds_alternative<HatHierarchical>(kind);
}

bool BasisSpec::is_euclidean() const noexcept {
  return std::holds_alternative<EuclideanSequence>(kind);
}

std::size_t BasisSpec::coefficient_count(std::size_t truncation) const {
  if (const auto* h = std::get_if<HaarWavelet>(&kind)) return (std::size_t{2} << h->J) - 1;
  if (const auto* h = std::get_if<HatHierarchical>(&kind)) return (std::size_t{2} << h->J) - 1;
  return truncation;
}

std::size_t BasisSpec::grid_size() const noexcept {
  if (const auto* h = std::get_if<HaarWavelet>(&kind)) return h->grid_size;
  if (const auto* h = std::get_if<HatHierarchical>(&kind)) return h->grid_size;
  if (const auto* e = std::get_if<Eigenbasis>(&kind)) return e->grid_size;
  return 0;
}

std::string BasisSpec::name() const {
  if (std::holds_alternative<HaarWavelet>(kind)) return "haar";
  if (std::holds_alternative<HatHierarchical>(kind)) return "hat";
  if (std::holds_alternative<Eigenbasis>(kind)) return "eigen";
  return "euclidean";
}

std::pair<unsigned, std::size_t> wavelet_level(std::size_t n) {
  if (n == 0) throw OutOfRange("n", "wavelet indices start at 1");
  unsigned j = 0;
  while ((std::size_t{2} << j) <= n) ++j;
  return {j, n - (std::size_t{1} << j)};
}

std::vector<double> midpoint_grid(std::size_t size) {
  std::vector<double> x(size);
  for (std::size_t i = 0; i < size; ++i)
    x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(size);
  return x;
}

double basis_function(const BasisSpec& basis, std::size_t n, double x) {
  if (basis.is_euclidean()) throw InvalidSpec("sequence basis has no point evaluation");
  if (const auto* e = std::get_if<Eigenbasis>(&basis.kind)) {
    (void)e;
    const double norm = basis.unit_norm ? std::numbers::sqrt2 : 1.0;
    return norm * std::sin(static_cast<double>(n) * std::numbers::pi * x);
  }
  const auto [j, k] = wavelet_level(n);
  const double scale = std::ldexp(1.0, static_cast<int>(j));
  const double arg = scale * x - static_cast<double>(k);
  if (std::holds_alternative<HaarWavelet>(basis.kind)) return std::sqrt(scale) * haar(arg);
  const double norm = basis.unit_norm ? std::sqrt(3.0) : 1.0;
  return norm * std::sqrt(scale) * hat(arg);
}

void synthesize_into(const BasisSpec& basis, std::span<const double> c, std::span<double> out) {
  if (basis.is_euclidean()) {
    if (out.size() != c.size()) throw DimensionMismatch("output size must match coefficient count");
    std::copy(c.begin(), c.end(), out.begin());
    return;
  }
  if (out.size() != basis.grid_size()) throw DimensionMismatch("output size must match the grid");
  if (basis.is_wavelet()) {
    const std::size_t expected = basis.coefficient_count(0);
    if (c.size() != expected)
      throw DimensionMismatch("wavelet synthesis needs " + std::to_string(expected) +
                              " coefficients, got " + std::to_string(c.size()));
    if (const auto* h = std::get_if<HaarWavelet>(&basis.kind)) {
      synthesize_wavelet(h->J, 1.0, c, out, haar);
    } else {
      const auto& w = std::get<HatHierarchical>(basis.kind);
      synthesize_wavelet(w.J, basis.unit_norm ? std::sqrt(3.0) : 1.0, c, out, hat);
    }
    return;
  }
  // Eigenbasis: sin(n pi x) by the angle-addition recurrence per grid point.
  const double norm = basis.unit_norm ? std::numbers::sqrt2 : 1.0;
  const std::size_t g = out.size();
  for (std::size_t i = 0; i < g; ++i) {
    const double theta = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(g);
    const double c1 = std::cos(theta);
    const double s1 = std::sin(theta);
    double sn = 0.0;
    double cn = 1.0;
    double acc = 0.0;
    for (std::size_t n = 1; n <= c.size(); ++n) {
      const double next_s = sn * c1 + cn * s1;
      cn = cn * c1 - sn * s1;
      sn = next_s;
      acc += c[n - 1] * sn;
    }
    out[i] = norm * acc;
  }
}

std::vector<double> synthesize(const BasisSpec& basis, std::span<const double> c) {
  std::vector<double> out(basis.is_euclidean() ? c.size() : basis.grid_size());
  synthesize_into(basis, c, out);
  return out;
}

}  // namespace stableinfer
