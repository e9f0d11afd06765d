#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "freshcache/allocator.hpp"
#include "freshcache/rng.hpp"
#include "test_util.hpp"

using namespace freshcache;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

bool is_clamped(const AllocationResult& r, std::size_t i) {
  for (std::size_t j : r.clamped) {
    if (j == i) return true;
  }
  return false;
}

// Marginal freshness gain of file i at rate c; Eq-side of the stationarity
// conditions.
double marginal(const FileParams& f, bool cached, double c) {
  if (cached) {
    const double d = c + f.lambda;
    return (f.u / (f.u + f.lambda)) * f.lambda / (d * d);
  }
  const double d = c + f.lambda + c * f.lambda / f.s;
  return f.lambda / (d * d);
}

SystemConfig random_instance(Xoshiro256pp& rng, std::size_t n, double budget_lo,
                             double budget_hi) {
  auto files = testutil::random_files(rng, n);
  const double C = testutil::uniform(rng, budget_lo, budget_hi);
  return SystemConfig(std::move(files), static_cast<int>(n), C);
}

}  // namespace

TEST_CASE("phi priorities") {
  CHECK(phi(FileParams(1.0, 1.0, 1.0), true) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(phi(FileParams(1.0, 1.0, 1.0), false) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi(FileParams(2.0, 2.0, 1.0), true) == doctest::Approx(0.25).epsilon(1e-15));

  Xoshiro256pp rng(21);
  for (int i = 0; i < 1000; ++i) {
    FileParams f(testutil::rate_draw(rng), testutil::rate_draw(rng), testutil::rate_draw(rng));
    CHECK(phi(f, false) > phi(f, true));
  }
}

TEST_CASE("solve_beta closed form") {
  const BetaEntry single[] = {{1.0, 0.5}};
  const double beta = solve_beta(single, 1.0);
  CHECK(beta == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(1.0 * (std::sqrt(0.5) / std::sqrt(beta) - 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  const BetaEntry pair[] = {{0.7, 1.3}, {0.7, 1.3}};
  const double beta2 = solve_beta(pair, 3.0);
  const double implied = 0.7 * (std::sqrt(1.3) / std::sqrt(beta2) - 1.0);
  CHECK(implied == doctest::Approx(1.5).epsilon(1e-12));

  // budget -> 0 drives beta to the weighted mean of sqrt(phi), squared
  const BetaEntry trio[] = {{1.0, 0.5}, {2.0, 2.0}, {0.5, 1.0}};
  double wsum = 0.0, wroot = 0.0;
  for (const auto& e : trio) {
    wsum += e.weight;
    wroot += e.weight * std::sqrt(e.phi);
  }
  const double limit = (wroot / wsum) * (wroot / wsum);
  CHECK(solve_beta(trio, 1e-12) == doctest::Approx(limit).epsilon(1e-9));
}

TEST_CASE("solve_beta satisfies the budget identity on random entries") {
  Xoshiro256pp rng(22);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<BetaEntry> entries;
    const int n = 1 + static_cast<int>(testutil::uniform(rng, 0.0, 7.0));
    for (int i = 0; i < n; ++i) {
      entries.push_back({testutil::rate_draw(rng), testutil::rate_draw(rng, 0.1, 5.0)});
    }
    const double budget = testutil::uniform(rng, 0.01, 10.0);
    const double beta = solve_beta(entries, budget);
    double residual = -budget;
    for (const auto& e : entries) {
      residual += e.weight * (std::sqrt(e.phi) / std::sqrt(beta) - 1.0);
    }
    CHECK(std::fabs(residual) <= 1e-12 * std::max(1.0, budget));
  }
}

TEST_CASE("solve_beta rejects bad input") {
  CHECK_THROWS_AS(solve_beta({}, 1.0), InvalidParameterError);
  const BetaEntry e[] = {{1.0, 1.0}};
  CHECK_THROWS_AS(solve_beta(e, 0.0), InvalidParameterError);
  CHECK_THROWS_AS(solve_beta(e, -1.0), InvalidParameterError);
  const BetaEntry bad[] = {{-1.0, 1.0}};
  CHECK_THROWS_AS(solve_beta(bad, 1.0), InvalidParameterError);
}

TEST_CASE("allocate: single file absorbs the whole budget") {
  SystemConfig config(std::vector<FileParams>{FileParams(1.0, 1.0, 1.0)}, 1, 2.5);
  const AllocationResult r = allocate(config, {1});
  CHECK(r.c[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(r.beta_valid);
  CHECK(r.active[0]);
  CHECK(r.unspent == 0.0);
}

TEST_CASE("allocate: identical files split the budget") {
  std::vector<FileParams> files{FileParams(1.0, 1.0, 1.0), FileParams(1.0, 1.0, 1.0)};
  SystemConfig config(files, 2, 2.0);
  const AllocationResult r = allocate(config, {1, 1});
  CHECK(r.c[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.c[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("allocate: zero budget short-circuits") {
  std::vector<FileParams> files{FileParams(1.0, 1.0, 1.0), FileParams(2.0, 1.0, 1.0)};
  SystemConfig config(files, 2, 0.0);
  const AllocationResult r = allocate(config, {1, 0});
  CHECK(r.c == std::vector<double>{0.0, 0.0});
  CHECK(r.objective == 0.0);
  CHECK_FALSE(r.beta_valid);
  CHECK(std::isinf(r.beta));
}

TEST_CASE("allocate: geometric benchmark at C = 1 starves the two fastest files") {
  const SystemConfig config = testutil::geometric_config(1.0, 8);
  std::vector<int> k(8, 0);
  k[5] = 1;  // the optimal C = 1 vector caches only file 6
  const AllocationResult r = allocate(config, k);
  CHECK(r.c[0] == 0.0);
  CHECK(r.c[1] == 0.0);
  CHECK_FALSE(r.active[0]);
  CHECK_FALSE(r.active[1]);
  CHECK(sum(r.c) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.clamped.empty());
}

TEST_CASE("allocate: tiny caps clamp everything and leave budget unspent") {
  std::vector<FileParams> files{FileParams(1.0, 0.1, 1.0), FileParams(1.0, 0.1, 1.0)};
  SystemConfig config(files, 2, 10.0);
  const AllocationResult r = allocate(config, {0, 0});
  CHECK(r.c[0] == 0.1);
  CHECK(r.c[1] == 0.1);
  CHECK(r.unspent == doctest::Approx(9.8).epsilon(1e-12));
  CHECK(r.clamped.size() == 2);
  CHECK(r.active[0]);
  CHECK(r.active[1]);
  CHECK(r.beta == 0.0);
}

TEST_CASE("allocate rejects malformed caching vectors") {
  SystemConfig config(std::vector<FileParams>{FileParams(1.0, 1.0, 1.0)}, 1, 1.0);
  CHECK_THROWS_AS(allocate(config, {1, 0}), DimensionMismatchError);
  CHECK_THROWS_AS(allocate(config, {2}), InvalidParameterError);
}

TEST_CASE("allocate ignores the cache capacity; the selector enforces it") {
  SystemConfig config(std::vector<FileParams>{FileParams(1.0, 1.0, 1.0)}, 0, 1.0);
  const AllocationResult r = allocate(config, {1});
  CHECK(r.c[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("allocate satisfies the KKT certificate on random instances") {
  Xoshiro256pp rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(testutil::uniform(rng, 0.0, 6.0));
    SystemConfig config = random_instance(rng, n, 0.05, 1.2 * static_cast<double>(n));
    const auto k = testutil::random_k(rng, n);
    const AllocationResult r = allocate(config, k);
    REQUIRE(r.beta_valid);
    CHECK(r.iterations >= 1);
    CHECK(r.iterations <= 2 * static_cast<int>((n + 1) * (n + 1)));

    bool all_uncached_clamped = r.clamped.size() == n;
    if (all_uncached_clamped) {
      CHECK(r.unspent >= 0.0);
      CHECK(sum(r.c) <= config.rate_budget + 1e-9);
    } else {
      CHECK(std::fabs(sum(r.c) - config.rate_budget) <= 1e-9);
      CHECK(r.unspent == 0.0);
    }

    for (std::size_t i = 0; i < n; ++i) {
      const FileParams& f = config.files[i];
      CHECK(r.c[i] >= 0.0);
      if (k[i] == 0) CHECK(r.c[i] <= f.u + 1e-12);
      if (is_clamped(r, i)) {
        CHECK(k[i] == 0);
        CHECK(r.c[i] == f.u);
        continue;
      }
      if (r.c[i] > 0.0) {
        const double m = marginal(f, k[i] == 1, r.c[i]);
        CHECK(std::fabs(m - r.beta) <= 1e-6 * r.beta);
      } else {
        CHECK(phi(f, k[i] == 1) <= r.beta + 1e-9);
      }
    }

    // threshold ordering: active flags follow the priority order
    for (std::size_t i = 0; i < n; ++i) {
      if (!(r.c[i] > 0.0) || is_clamped(r, i)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (phi(config.files[j], k[j] == 1) >= phi(config.files[i], k[i] == 1)) {
          CHECK(r.c[j] > 0.0);
        }
      }
    }
  }
}

TEST_CASE("grid_oracle examples") {
  SystemConfig single(std::vector<FileParams>{FileParams(1.0, 1.0, 1.0)}, 1, 1.0);
  const GridResult g1 = grid_oracle(single, {1}, 0.01);
  CHECK(g1.c[0] == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<FileParams> files{FileParams(1.0, 1.0, 1.0), FileParams(1.0, 1.0, 1.0)};
  SystemConfig sym(files, 2, 2.0);
  const GridResult g2 = grid_oracle(sym, {1, 1}, 0.01);
  CHECK(std::fabs(g2.c[0] - 1.0) <= 0.01 + 1e-12);
  CHECK(std::fabs(g2.c[1] - 1.0) <= 0.01 + 1e-12);

  SystemConfig big(testutil::geometric_config(1.0, 8));
  CHECK_THROWS_AS(grid_oracle(big, std::vector<int>(8, 0), 0.01), InstanceTooLargeError);
}

TEST_CASE("grid_oracle keeps exact-boundary points despite rounding dust") {
  // C = 0.015 spent as 0.005 + 0.010 leaves a -1e-18-scale remainder, so the
  // full-spend split must still reach its leaf with the last coordinate zero;
  // the tiny lambdas make that split the unique optimum
  std::vector<FileParams> files{FileParams(0.002, 10.0, 1.0), FileParams(0.002, 10.0, 1.0),
                                FileParams(50.0, 1.0, 0.01)};
  SystemConfig config(files, 3, 0.015);
  const std::vector<int> k{1, 1, 0};
  const GridResult g = grid_oracle(config, k, 0.005);
  const double full_spend_split =
      freshness_cached(0.002, 10.0, 0.005) + freshness_cached(0.002, 10.0, 0.010);
  CHECK(g.objective >= full_spend_split - 1e-12);
  CHECK(sum(g.c) >= 0.015 - 1e-9);
}

TEST_CASE("allocate dominates the grid oracle") {
  Xoshiro256pp rng(24);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(testutil::uniform(rng, 0.0, 2.99));
    std::vector<FileParams> files;
    const double step = 0.005;
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = testutil::rate_draw(rng, 0.3, 3.0);
      // caps on the grid keep the clamped optimum representable
      const double u = std::max(step, std::round(testutil::uniform(rng, 0.2, 2.0) / step) * step);
      files.emplace_back(lambda, u, testutil::rate_draw(rng, 0.3, 3.0));
    }
    const double C =
        std::max(step, std::round(testutil::uniform(rng, 0.2, 1.2) / step) * step);
    SystemConfig config(files, static_cast<int>(n), C);
    const auto k = testutil::random_k(rng, n);

    const AllocationResult a = allocate(config, k);
    const GridResult g = grid_oracle(config, k, step);
    CHECK(a.objective >= g.objective - 1e-12);
    CHECK(a.objective - g.objective < 1e-3);
  }

  // a well-conditioned fixed instance sits an order of magnitude closer
  std::vector<FileParams> files{FileParams(1.0, 1.5, 0.8), FileParams(0.8, 1.0, 1.2),
                                FileParams(1.4, 2.0, 0.5)};
  SystemConfig config(files, 3, 1.0);
  for (const std::vector<int>& k :
       {std::vector<int>{1, 0, 1}, std::vector<int>{0, 0, 0}, std::vector<int>{1, 1, 1}}) {
    const AllocationResult a = allocate(config, k);
    const GridResult g = grid_oracle(config, k, 0.005);
    CHECK(a.objective >= g.objective - 1e-12);
    CHECK(a.objective - g.objective < 1e-4);
  }
}
