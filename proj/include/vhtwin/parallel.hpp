#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace vhtwin {

/// Intra-run parallelism cap from VHTWIN_THREADS; 0 or unset means serial.
inline int thread_budget() {
  const char* env = std::getenv("VHTWIN_THREADS");
  if (env == nullptr) return 0;
  const int v = std::atoi(env);
  return v < 0 ? 0 : v;
}

/// Runs body(i) for i in [0, n). Bodies must not share mutable state; callers
/// key results by index so merge order is fixed regardless of thread count.
template <typename Body>
void parallel_for(int n, const Body& body) {
  const int budget = thread_budget();
  if (budget <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = std::min(budget, n);
  std::atomic<int> cursor{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&cursor, n, &body] {
      for (int i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace vhtwin
