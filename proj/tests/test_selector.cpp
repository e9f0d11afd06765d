#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "freshcache/selector.hpp"
#include "freshcache/rng.hpp"
#include "test_util.hpp"

using namespace freshcache;

namespace {

std::vector<int> k_of_indices(std::size_t n, std::initializer_list<int> ones) {
  std::vector<int> k(n, 0);
  for (int i : ones) k[static_cast<std::size_t>(i - 1)] = 1;  // 1-based file indices
  return k;
}

}  // namespace

TEST_CASE("geometric benchmark: optimal caching status per budget") {
  SUBCASE("C = 1 caches only the 6th file") {
    const SelectionResult sel = optimize(testutil::geometric_config(1.0, 8));
    CHECK(sel.k == k_of_indices(8, {6}));
    CHECK(sel.explored == 256);
  }
  SUBCASE("C = 4 caches files 3..7") {
    const SelectionResult sel = optimize(testutil::geometric_config(4.0, 8));
    CHECK(sel.k == k_of_indices(8, {3, 4, 5, 6, 7}));
  }
  SUBCASE("C = 8 caches every file") {
    const SelectionResult sel = optimize(testutil::geometric_config(8.0, 8));
    CHECK(sel.k == std::vector<int>(8, 1));
  }
}

TEST_CASE("K = 0 forces the all-zero vector") {
  const SelectionResult sel = optimize(testutil::geometric_config(2.0, 0));
  CHECK(sel.k == std::vector<int>(8, 0));
  CHECK(sel.explored == 1);
  CHECK(sel.objective == sel.allocation.objective);
}

TEST_CASE("optimize beats every explicitly enumerated candidate") {
  Xoshiro256pp rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(testutil::uniform(rng, 0.0, 5.0));
    auto files = testutil::random_files(rng, n);
    const int K = static_cast<int>(testutil::uniform(rng, 0.0, static_cast<double>(n) + 0.99));
    const double C = testutil::uniform(rng, 0.1, 1.0 * static_cast<double>(n));
    SystemConfig config(std::move(files), K, C);
    const SelectionResult sel = optimize(config);

    // independent enumeration order: plain numeric masks, opposite bit layout
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      if (std::popcount(mask) > K) continue;
      std::vector<int> k(n, 0);
      for (std::size_t j = 0; j < n; ++j) k[j] = static_cast<int>((mask >> j) & 1);
      CHECK(sel.objective >= allocate(config, k).objective - 1e-12);
    }
  }
}

TEST_CASE("objective is monotone in capacity and budget") {
  double prev = -1.0;
  for (int K = 0; K <= 8; ++K) {
    const double objective = optimize(testutil::geometric_config(4.0, K)).objective;
    CHECK(objective >= prev - 1e-12);
    prev = objective;
  }
  prev = -1.0;
  for (double C : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double objective = optimize(testutil::geometric_config(C, 8)).objective;
    CHECK(objective >= prev - 1e-12);
    prev = objective;
  }
}

TEST_CASE("objective saturates once the unconstrained optimum fits") {
  const SelectionResult full = optimize(testutil::geometric_config(1.0, 8));
  int m = 0;
  for (int v : full.k) m += v;
  CHECK(m == 1);
  for (int K = m; K <= 8; ++K) {
    CHECK(optimize(testutil::geometric_config(1.0, K)).objective == full.objective);
  }
}

TEST_CASE("exact ties prefer fewer cached files, then the lexicographically smaller k") {
  // two identical files: caching either one gives bit-identical objectives
  std::vector<FileParams> files{FileParams(1.0, 5.0, 0.2), FileParams(1.0, 5.0, 0.2)};
  SystemConfig config(files, 2, 0.8);
  const SelectionResult sel = optimize(config);
  const double one_cached = allocate(config, {0, 1}).objective;
  const double both_cached = allocate(config, {1, 1}).objective;
  if (sel.objective == one_cached && one_cached != both_cached) {
    CHECK(sel.k == std::vector<int>{0, 1});
  }
  // the winner never caches more files than an equal-objective alternative
  const double none_cached = allocate(config, {0, 0}).objective;
  if (sel.objective == none_cached) CHECK(sel.k == std::vector<int>{0, 0});
}

TEST_CASE("optimize is identical for any thread count") {
  Xoshiro256pp rng(32);
  auto files = testutil::random_files(rng, 9);
  SystemConfig config(std::move(files), 5, 2.0);
  const SelectionResult a = optimize(config, 1);
  const SelectionResult b = optimize(config, 4);
  const SelectionResult c = optimize(config, 3);
  CHECK(a.k == b.k);
  CHECK(a.k == c.k);
  CHECK(a.objective == b.objective);
  CHECK(a.objective == c.objective);
}

TEST_CASE("enumeration guard directs to the greedy fallback") {
  std::vector<FileParams> files(25, FileParams(1.0, 1.0, 1.0));
  SystemConfig config(std::move(files), 3, 1.0);
  CHECK_THROWS_WITH_AS(optimize(config), doctest::Contains("greedy"), InstanceTooLargeError);
  CHECK_NOTHROW(greedy_optimize(config));
}

TEST_CASE("greedy_optimize") {
  SUBCASE("n = 1 picks the better of caching or not") {
    SystemConfig cache_wins(std::vector<FileParams>{FileParams(1.0, 5.0, 0.2)}, 1, 2.0);
    const SelectionResult g = greedy_optimize(cache_wins);
    CHECK(g.heuristic);
    CHECK(g.objective == optimize(cache_wins).objective);

    SystemConfig source_wins(std::vector<FileParams>{FileParams(1.0, 1.0, 5.0)}, 1, 0.5);
    CHECK(greedy_optimize(source_wins).objective == optimize(source_wins).objective);
  }
  SUBCASE("geometric benchmark at C = 8 matches the exhaustive optimum") {
    const SelectionResult g = greedy_optimize(testutil::geometric_config(8.0, 8));
    CHECK(g.k == std::vector<int>(8, 1));
    CHECK(g.objective == optimize(testutil::geometric_config(8.0, 8)).objective);
  }
  SUBCASE("never beats the exhaustive search") {
    Xoshiro256pp rng(33);
    for (int trial = 0; trial < 8; ++trial) {
      const std::size_t n = 2 + static_cast<std::size_t>(testutil::uniform(rng, 0.0, 4.0));
      auto files = testutil::random_files(rng, n);
      const int K = static_cast<int>(testutil::uniform(rng, 0.0, static_cast<double>(n) + 0.99));
      SystemConfig config(std::move(files), K, testutil::uniform(rng, 0.1, 3.0));
      CHECK(greedy_optimize(config).objective <= optimize(config).objective + 1e-12);
    }
  }
}
