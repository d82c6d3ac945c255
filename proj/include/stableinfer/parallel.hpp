#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stableinfer {

/// Process-wide worker count used by batch operations (>= 1).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls body(begin, end) over disjoint, contiguous index ranges covering
/// [0, n).  Work items must not depend on the partition.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Sum in a fixed order: fixed-size blocks summed left to right, then a
/// pairwise tree over block totals.  The result is independent of the
/// thread count.
double deterministic_sum(std::span<const double> values);

/// Mean of values under deterministic_sum ordering.
double deterministic_mean(std::span<const double> values);

}  // namespace stableinfer
