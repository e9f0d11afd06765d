#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "freshcache/model.hpp"

namespace freshcache {

// Optimal update rates for a fixed caching vector.
struct AllocationResult {
  std::vector<double> c;
  // Final water level. Invalid (and +inf) only for the C = 0 short circuit;
  // 0 when leftover budget cannot be absorbed by any file.
  double beta = std::numeric_limits<double>::infinity();
  bool beta_valid = false;
  std::vector<bool> active;           // c_i > 0
  std::vector<std::size_t> clamped;   // uncached files pinned at c_i = u_i
  double objective = 0.0;             // total freshness at c
  double unspent = 0.0;               // budget no file could absorb
  int iterations = 0;                 // water-level solves plus clamp passes
};

// Priority of a file in the water-filling order:
//   u/(lambda*(u+lambda)) if cached, 1/lambda if uncached.
// For the same file the uncached priority is always the larger one.
double phi(const FileParams& file, bool cached);

// One summand of the budget identity sum_i a_i*(sqrt(phi_i/beta) - 1) = C.
struct BetaEntry {
  double weight;  // a_i: lambda_i if cached, s_i*lambda_i/(s_i+lambda_i) if not
  double phi;
};

// Water level over a set of files assumed all active and unclamped:
//   sqrt(beta) = sum a_i*sqrt(phi_i) / (budget + sum a_i).
double solve_beta(std::span<const BetaEntry> entries, double budget);

// Solves the rate-allocation problem for fixed k: active-set removal of files
// whose priority falls below the water level, then clamping of uncached files
// whose candidate rate exceeds u_i, restarting on the residual budget until a
// fixpoint. k may exceed the cache capacity here; the selector enforces it.
AllocationResult allocate(const SystemConfig& config, const std::vector<int>& k);

struct GridResult {
  std::vector<double> c;
  double objective = 0.0;
};

// Exhaustive search over rate vectors on the grid {0, step, 2*step, ...}
// with sum(c) <= C and c_i <= u_i for uncached files. Ground truth for
// allocate up to the grid resolution; guarded to n <= 4.
GridResult grid_oracle(const SystemConfig& config, const std::vector<int>& k, double step);

}  // namespace freshcache
