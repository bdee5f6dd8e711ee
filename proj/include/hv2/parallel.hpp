#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace hv2 {

// 0 = use hardware concurrency; set from the CLI --threads flag.
inline int& thread_cap() {
  static int cap = 0;
  return cap;
}

inline int default_threads() {
  if (thread_cap() > 0) return thread_cap();
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Static partition of [0, n) into contiguous chunks, one per worker. Each
// index is visited exactly once, so writes to per-index slots are race-free
// and results do not depend on the thread count.
inline void parallel_for(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& body,
                         int threads = 0) {
  if (threads <= 0) threads = default_threads();
  if (threads <= 1 || n <= 1) {
    if (n > 0) body(0, n);
    return;
  }
  const std::int64_t workers = std::min<std::int64_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hv2
