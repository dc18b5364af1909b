#pragma once

// Minimal work pool for embarrassingly parallel grids. Results must be
// written to per-index slots so the output is independent of scheduling.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace oamcv {

/// Worker count: OAMCV_THREADS if set and valid, otherwise the hardware
/// concurrency, clamped to [1, jobs].
inline unsigned worker_count(std::size_t jobs) {
  unsigned workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("OAMCV_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1) {
      workers = static_cast<unsigned>(parsed);
    }
  }
  if (workers < 1) workers = 1;
  if (jobs < workers) workers = static_cast<unsigned>(jobs);
  return workers;
}

/// Run body(i) for i in [0, n) across a work pool. The first exception, if
/// any, is rethrown on the calling thread after all workers join.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  if (n == 0) return;
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      std::size_t i;
      while ((i = next.fetch_add(1)) < n && !failed.load()) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace oamcv
