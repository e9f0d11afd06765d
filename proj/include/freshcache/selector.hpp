#pragma once

#include <cstdint>

#include "freshcache/allocator.hpp"

namespace freshcache {

struct SelectionResult {
  std::vector<int> k;
  AllocationResult allocation;
  double objective = 0.0;
  std::uint64_t explored = 0;  // candidate caching vectors evaluated
  bool heuristic = false;
};

// Exhaustive search over every k with sum(k) <= K, solving the rate
// allocation for each. Candidates are enumerated by increasing number of
// cached files, then lexicographically, and ties keep the earliest candidate,
// so the reported optimum caches the fewest files and is lexicographically
// smallest among equals. Guarded to n <= 24 unless allow_large is set.
// threads == 0 uses the available hardware parallelism; the result is
// identical for any thread count.
SelectionResult optimize(const SystemConfig& config, unsigned threads = 0,
                         bool allow_large = false);

// Local-search fallback for instances beyond the enumeration guard: starting
// from the empty cache, repeatedly applies the single caching flip that most
// increases the objective. Not guaranteed optimal; the result is flagged
// heuristic.
SelectionResult greedy_optimize(const SystemConfig& config, unsigned threads = 0);

}  // namespace freshcache
