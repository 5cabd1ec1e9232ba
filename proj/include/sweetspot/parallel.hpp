#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sweetspot {

inline size_t resolve_threads(size_t requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [0, n). Work items must write only to their own slots;
// results are then independent of the thread count and of scheduling. The
// first exception thrown by any item is rethrown on the calling thread.
template <typename Fn>
void parallel_for(size_t n, size_t n_threads, Fn&& fn) {
  n_threads = resolve_threads(n_threads);
  if (n_threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (n_threads > n) n_threads = n;
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (size_t t = 0; t < n_threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        // Strided assignment: cheap and independent of per-item runtime.
        for (size_t i = t; i < n; i += n_threads) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sweetspot
