#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sparcc {

// Runs body(i) for i in [0, count) across up to `threads` workers, pulling
// indices from a shared counter. Exceptions are captured per index and the
// lowest-index one is rethrown after all workers join, so the visible failure
// is deterministic regardless of scheduling. threads <= 1 runs inline.
inline void parallel_for(long count, int threads, const std::function<void(long)>& body) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = (int)std::min<long>(threads, count);
  std::vector<std::exception_ptr> errors((std::size_t)count);
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve((std::size_t)workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const long i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          errors[(std::size_t)i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sparcc
