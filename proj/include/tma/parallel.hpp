#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace tma {

/// Resolves a worker count: an explicit positive request wins, then the
/// TMA_DM_THREADS environment variable, then the hardware concurrency.
inline int worker_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TMA_DM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over [0, n) in chunks pulled from a shared counter.
/// Chunks are claimed in increasing order. The first exception thrown by any
/// worker is rethrown on the calling thread.
template <typename Body>
void parallel_chunks(std::uint64_t n, int workers, std::uint64_t chunk, Body&& body) {
  if (n == 0) return;
  chunk = std::max<std::uint64_t>(1, chunk);
  workers = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(1, workers)),
                                                     (n + chunk - 1) / chunk));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < n; b += chunk) body(b, std::min(n, b + chunk));
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    try {
      for (;;) {
        const std::uint64_t b = next.fetch_add(chunk);
        if (b >= n) break;
        body(b, std::min(n, b + chunk));
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tma
