#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace freshcache::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(worker, first, last) over [0, count) split into contiguous chunks,
// one worker per chunk. Workers must only touch disjoint state (slot writes),
// which keeps results independent of the thread count. The first worker
// exception, if any, is rethrown on the calling thread.
inline void parallel_chunks(std::size_t count, unsigned threads,
                            const std::function<void(unsigned, std::size_t, std::size_t)>& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  if (count == 0) return;
  const std::size_t chunk = (count + workers - 1) / workers;
  if (workers == 1) {
    fn(0, 0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t first = static_cast<std::size_t>(w) * chunk;
    const std::size_t last = std::min(count, first + chunk);
    if (first >= last) break;
    pool.emplace_back([&, w, first, last] {
      try {
        fn(w, first, last);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace freshcache::detail
