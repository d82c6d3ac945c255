#include "stableinfer/rng.hpp"

#include <cmath>
#include <numbers>

namespace stableinfer {

double Stream::normal() noexcept {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Stream::exponential() noexcept { return -std::log(uniform01()); }

}  // namespace stableinfer
