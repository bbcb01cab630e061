#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cdiff {

/// Resolves a requested worker count: 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(item, worker) for item in [0, count) on up to `threads` workers.
/// Items are claimed dynamically; the first exception thrown is rethrown on
/// the calling thread after all workers stop.
template <class Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto body = [&](unsigned worker) {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t item = cursor.fetch_add(1, std::memory_order_relaxed);
      if (item >= count) return;
      try {
        task(item, worker);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };

  if (workers <= 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace cdiff
