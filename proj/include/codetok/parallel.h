#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace codetok {

// Runs fn(i) for every i in [0, n) on up to `threads` workers. Callers write
// per-index results and reduce them in index order afterwards, so outputs do
// not depend on the worker count. The first exception thrown is rethrown.
template <typename Fn>
void ParallelFor(size_t n, int threads, Fn&& fn) {
  const size_t workers =
      std::min<size_t>(n, static_cast<size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// Fixed partition of [0, n) into `chunks` contiguous ranges, independent of
// the worker count.
inline std::pair<size_t, size_t> ChunkRange(size_t n, size_t chunks,
                                            size_t c) {
  return {n * c / chunks, n * (c + 1) / chunks};
}

}  // namespace codetok
