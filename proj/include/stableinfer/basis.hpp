#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stableinfer/sequences.hpp"

namespace stableinfer {

inline constexpr std::size_t kDefaultGridSize = std::size_t{1} << 14;

/// Coefficients are the element itself; norms are l^q.
struct EuclideanSequence {
  double q = 2.0;
};

/// psi = +1 on [0, 1/2), -1 on [1/2, 1); levels j = 0..J.
struct HaarWavelet {
  unsigned J = 10;
  std::size_t grid_size = kDefaultGridSize;
};

/// psi(x) = 1 - |2x - 1| on [0, 1] (times sqrt 3 when unit-norm).
struct HatHierarchical {
  unsigned J = 10;
  std::size_t grid_size = kDefaultGridSize;
};

/// psi_n(x) = sqrt 2 sin(n pi x) with eigenvalues lambda_n; the scale
/// exponent s weights coefficient norms by lambda_n^-s.
struct Eigenbasis {
  CoefficientSequence eigenvalues = CoefficientSequence::power_law(1.0, 1.0);
  double s = 0.0;
  std::size_t grid_size = kDefaultGridSize;
};

struct BasisSpec {
  std::variant<EuclideanSequence, HaarWavelet, HatHierarchical, Eigenbasis> kind;
  bool unit_norm = true;

  static BasisSpec euclidean(double q = 2.0) { return {EuclideanSequence{q}, true}; }
  static BasisSpec haar(unsigned J, std::size_t grid = kDefaultGridSize) {
    return {HaarWavelet{J, grid}, true};
  }
  static BasisSpec hat(unsigned J, std::size_t grid = kDefaultGridSize) {
    return {HatHierarchical{J, grid}, true};
  }
  static BasisSpec eigen(CoefficientSequence lambda, double s,
                         std::size_t grid = kDefaultGridSize) {
    return {Eigenbasis{std::move(lambda), s, grid}, true};
  }

  bool is_wavelet() const noexcept;
  bool is_euclidean() const noexcept;
  /// Number of coefficients: 2^(J+1) - 1 for wavelets, `truncation` otherwise.
  std::size_t coefficient_count(std::size_t truncation) const;
  /// Synthesis grid size; 0 for sequence bases.
  std::size_t grid_size() const noexcept;
  std::string name() const;
};

/// Wavelet coefficient n = 2^j + k (1-based) and back.
std::pair<unsigned, std::size_t> wavelet_level(std::size_t n);
constexpr std::size_t wavelet_index(unsigned j, std::size_t k) {
  return (std::size_t{1} << j) + k;
}

/// Midpoints (i + 1/2) / size of a uniform grid on [0, 1].
std::vector<double> midpoint_grid(std::size_t size);

/// psi_n evaluated at x (1-based n); not defined for sequence bases.
double basis_function(const BasisSpec& basis, std::size_t n, double x);

/// Field values on the basis grid (wavelets, eigenbasis), or a copy of the
/// coefficients (sequence basis).  Wavelet bases require exactly
/// coefficient_count coefficients; throws DimensionMismatch otherwise.
std::vector<double> synthesize(const BasisSpec& basis, std::span<const double> coefficients);

/// As synthesize, writing into `out` (size grid_size()).
void synthesize_into(const BasisSpec& basis, std::span<const double> coefficients,
                     std::span<double> out);

}  // namespace stableinfer
