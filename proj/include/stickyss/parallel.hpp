#ifndef STICKYSS_PARALLEL_HPP
#define STICKYSS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace stickyss {

inline std::atomic<int>& thread_budget_slot() {
  static std::atomic<int> slot{1};
  return slot;
}

inline void set_thread_budget(int n) { thread_budget_slot() = std::max(1, n); }
inline int thread_budget() { return thread_budget_slot().load(); }

// Splits [0, n) into contiguous blocks, one per worker. The partition only
// depends on n and the worker count, so per-block results merged in block
// order are reproducible.
template <class Fn>
void parallel_blocks(std::size_t n, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n == 0 ? 1 : n)));
  if (workers == 1) {
    fn(std::size_t{0}, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    std::size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
    pool.emplace_back([&fn, b, e, w] { fn(b, e, w); });
  }
  fn(std::size_t{0}, std::min(n, chunk), 0);
  for (auto& t : pool) t.join();
}

} // namespace stickyss

#endif
