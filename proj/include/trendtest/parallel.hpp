#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace trendtest::detail {

// Runs fn(i) for i in [0, n) over the given number of threads, in contiguous
// chunks. fn must only write to per-index state; results are then identical
// for any thread count.
template <class Fn>
void parallel_for_index(std::size_t n, int threads, Fn&& fn) {
  const std::size_t t =
      std::min<std::size_t>(std::max(threads, 1), n == 0 ? 1 : n);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t w = 0; w < t; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace trendtest::detail
