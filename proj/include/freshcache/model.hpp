#pragma once

#include <cstddef>
#include <vector>

#include "freshcache/errors.hpp"

namespace freshcache {

// Per-file rates of the source -> cache -> user chain. All rates are events
// per unit time and must be strictly positive and finite; construction
// rejects anything else.
struct FileParams {
  double lambda;  // update rate of the file at the source
  double u;       // request rate of the user for this file
  double s;       // transmission rate of the source -> user channel

  FileParams(double lambda, double u, double s);
};

// Problem instance: the file list plus the two budgets.
struct SystemConfig {
  std::vector<FileParams> files;
  int cache_capacity;  // K, number of files the cache may store (0 <= K <= n)
  double rate_budget;  // C, total update rate available to the cache (C >= 0)

  SystemConfig(std::vector<FileParams> files, int cache_capacity, double rate_budget);

  std::size_t size() const { return files.size(); }
};

// A caching decision (k_i in {0,1}) and an update-rate vector c.
struct Policy {
  std::vector<int> k;
  std::vector<double> c;

  // Throws DimensionMismatchError or FeasibilityError naming the violated
  // constraint. Sum and cap constraints are checked with 1e-9 absolute slack
  // so that allocations assembled from floating-point arithmetic validate.
  void validate(const SystemConfig& config) const;
};

// Long-term average freshness at the user for a cached file:
//   u/(u+lambda) * c/(c+lambda).
// Zero iff c == 0, strictly increasing and concave in c, supremum u/(u+lambda).
double freshness_cached(double lambda, double u, double c);

// Long-term average freshness at the user for an uncached file:
//   c / (c + lambda + c*lambda/s).
// Zero iff c == 0, strictly increasing and concave in c, supremum s/(s+lambda).
double freshness_uncached(double lambda, double s, double c);

// Sum over files of the per-file freshness selected by k. Validates the
// policy against the configuration first.
double total_freshness(const SystemConfig& config, const Policy& policy);

// True when storing the file at the cache strictly beats fetching it from the
// source, at cache update rate c: c/(c+lambda) > s/u. Equivalent to comparing
// the two freshness formulas directly.
bool caching_preference(double lambda, double u, double s, double c);

}  // namespace freshcache
