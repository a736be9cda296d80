#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ram {

// Runs fn(i) for i in [0, n) across up to n_threads workers. Work items pull
// from a shared counter; results must be written to caller-owned slots
// indexed by i, so the outcome matches a sequential run regardless of
// scheduling. n_threads == 0 picks the hardware concurrency.
inline void parallel_for(long n, const std::function<void(long)>& fn, int n_threads = 0) {
  if (n <= 0) return;
  unsigned workers = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<long>(workers, n));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ram
