#include "freshcache/selector.hpp"

#include <bit>
#include <cstddef>
#include <limits>
#include <string>

#include "parallel.hpp"

namespace freshcache {
namespace {

// All masks with popcount <= capacity, ordered by popcount then numeric
// value. Bit n-1-j of a mask is the caching status of file j, so numeric
// order within a popcount class is lexicographic order on the k vector.
std::vector<std::uint64_t> enumerate_masks(std::size_t n, int capacity) {
  std::vector<std::uint64_t> masks;
  masks.push_back(0);
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (int m = 1; m <= capacity; ++m) {
    std::uint64_t v = (std::uint64_t{1} << m) - 1;
    while (v < limit) {
      masks.push_back(v);
      const std::uint64_t t = v | (v - 1);
      if (t + 1 >= limit) break;
      v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
    }
  }
  return masks;
}

std::vector<int> mask_to_k(std::uint64_t mask, std::size_t n) {
  std::vector<int> k(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    k[j] = static_cast<int>((mask >> (n - 1 - j)) & 1);
  }
  return k;
}

}  // namespace

SelectionResult optimize(const SystemConfig& config, unsigned threads, bool allow_large) {
  const std::size_t n = config.size();
  if (n > 62) throw InstanceTooLargeError("optimize cannot enumerate n > 62 files");
  if (n > 24 && !allow_large) {
    throw InstanceTooLargeError(
        "optimize enumerates up to 2^n caching vectors and is capped at n = 24 "
        "(n = " + std::to_string(n) + "); use greedy_optimize or lift the cap");
  }

  const std::vector<std::uint64_t> masks = enumerate_masks(n, config.cache_capacity);

  struct Best {
    double objective = -std::numeric_limits<double>::infinity();
    std::size_t index = std::numeric_limits<std::size_t>::max();
  };
  const unsigned workers = detail::resolve_threads(threads);
  std::vector<Best> bests(workers);
  detail::parallel_chunks(masks.size(), threads,
                          [&](unsigned w, std::size_t first, std::size_t last) {
                            Best local;
                            for (std::size_t idx = first; idx < last; ++idx) {
                              const AllocationResult a = allocate(config, mask_to_k(masks[idx], n));
                              if (a.objective > local.objective) {
                                local.objective = a.objective;
                                local.index = idx;
                              }
                            }
                            bests[w] = local;
                          });

  // Deterministic reduction: higher objective wins, exact ties go to the
  // earlier candidate (fewest cached files, then lexicographically smallest).
  Best best;
  for (const Best& b : bests) {
    if (b.index == std::numeric_limits<std::size_t>::max()) continue;
    if (b.objective > best.objective ||
        (b.objective == best.objective && b.index < best.index)) {
      best = b;
    }
  }

  SelectionResult result;
  result.k = mask_to_k(masks[best.index], n);
  result.allocation = allocate(config, result.k);
  result.objective = result.allocation.objective;
  result.explored = masks.size();
  return result;
}

SelectionResult greedy_optimize(const SystemConfig& config, unsigned threads) {
  (void)threads;  // candidate flips are evaluated sequentially
  const std::size_t n = config.size();

  SelectionResult result;
  result.k.assign(n, 0);
  result.allocation = allocate(config, result.k);
  result.objective = result.allocation.objective;
  result.explored = 1;
  result.heuristic = true;

  for (;;) {
    int cached = 0;
    for (int v : result.k) cached += v;

    std::size_t best_flip = n;
    double best_objective = result.objective;
    AllocationResult best_allocation;
    for (std::size_t i = 0; i < n; ++i) {
      const int flipped = 1 - result.k[i];
      if (flipped == 1 && cached + 1 > config.cache_capacity) continue;
      std::vector<int> candidate = result.k;
      candidate[i] = flipped;
      AllocationResult a = allocate(config, candidate);
      ++result.explored;
      if (a.objective > best_objective) {
        best_objective = a.objective;
        best_flip = i;
        best_allocation = std::move(a);
      }
    }
    if (best_flip == n) break;
    result.k[best_flip] = 1 - result.k[best_flip];
    result.allocation = std::move(best_allocation);
    result.objective = best_objective;
  }
  return result;
}

}  // namespace freshcache
