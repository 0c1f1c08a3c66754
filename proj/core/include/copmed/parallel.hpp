#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace copmed {

// Static index partition; results must be written to per-index slots so the
// outcome is identical for any thread count.
inline void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
  if (n_threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = std::min(n_threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Thread count from the COPMED_THREADS environment variable, else the
// hardware count.
inline int default_thread_count() {
  if (const char* env = std::getenv("COPMED_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace copmed
