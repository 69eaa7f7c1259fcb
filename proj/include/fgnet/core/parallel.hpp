// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FGNET_CORE_PARALLEL_HPP
#define FGNET_CORE_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fgnet {

/// Worker cap: min(hardware, FGNET_THREADS when set).
inline int max_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("FGNET_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

/// Data-parallel loop over [0, n). Each index is processed exactly once;
/// workers own disjoint contiguous ranges so writes to per-index slots
/// need no synchronization and results do not depend on thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const int workers = std::min<std::size_t>(max_threads(), n == 0 ? 1 : n);
  if (workers <= 1 || n < 256) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(n, w * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fgnet

#endif  // FGNET_CORE_PARALLEL_HPP
