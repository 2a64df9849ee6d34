#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pulselab {

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls task(i) for i in [0, n) on a small pool. Tasks write into
// preallocated per-index slots, so results never depend on scheduling.
// The first exception stops the pool and is rethrown.
template <class Task>
void parallel_for(std::size_t n, unsigned workers, Task&& task) {
  const std::size_t pool_size = std::min<std::size_t>(resolve_workers(workers), n);
  if (pool_size <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(pool_size);
  for (std::size_t w = 0; w < pool_size; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pulselab
