#include "stableinfer/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace stableinfer {
namespace {

std::atomic<unsigned> g_threads{1};
constexpr std::size_t kBlock = 1024;

double pairwise(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise(v.first(half)) + pairwise(v.subspan(half));
}

}  // namespace

void set_thread_count(unsigned n) { g_threads.store(std::max(1u, n)); }

unsigned thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(thread_count(), std::max<std::size_t>(1, n / 256)));
  if (workers <= 1 || n == 0) {
    if (n != 0) body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& t : pool) t.join();
}

double deterministic_sum(std::span<const double> values) {
  const std::size_t blocks = (values.size() + kBlock - 1) / kBlock;
  std::vector<double> totals(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const std::size_t lo = k * kBlock;
      const std::size_t hi = std::min(values.size(), lo + kBlock);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += values[i];
      totals[k] = s;
    }
  });
  return pairwise(totals);
}

double deterministic_mean(std::span<const double> values) {
  return values.empty() ? 0.0 : deterministic_sum(values) / static_cast<double>(values.size());
}

}  // namespace stableinfer
