#ifndef SOFTSWEEP_TOOLS_POOL_HPP
#define SOFTSWEEP_TOOLS_POOL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace softsweep::cli {

/// Runs body(i) for i in [0, n) on `workers` threads. Results must be written
/// to slots keyed by i; the scheduling order never reaches the output. The
/// first exception thrown by any task is rethrown after all threads join.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t count = std::min(workers, n);
  threads.reserve(count);
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(run);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace softsweep::cli

#endif  // SOFTSWEEP_TOOLS_POOL_HPP
