#include "freshcache/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace freshcache {
namespace {

// Tolerance on phi vs beta comparisons inside the active-set loop.
constexpr double kPhiTol = 1e-12;

double rate_weight(const FileParams& f, bool cached) {
  return cached ? f.lambda : f.s * f.lambda / (f.s + f.lambda);
}

void check_binary_vector(const SystemConfig& config, const std::vector<int>& k) {
  if (k.size() != config.size()) {
    throw DimensionMismatchError("caching vector has length " + std::to_string(k.size()) +
                                 ", expected " + std::to_string(config.size()));
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] != 0 && k[i] != 1) {
      throw InvalidParameterError("k[" + std::to_string(i + 1) + "] = " + std::to_string(k[i]) +
                                  " is not a binary caching status");
    }
  }
}

}  // namespace

double phi(const FileParams& file, bool cached) {
  return cached ? file.u / (file.lambda * (file.u + file.lambda)) : 1.0 / file.lambda;
}

double solve_beta(std::span<const BetaEntry> entries, double budget) {
  if (entries.empty()) throw InvalidParameterError("solve_beta: empty entry set");
  if (!std::isfinite(budget) || budget <= 0.0) {
    throw InvalidParameterError("solve_beta: budget must be positive, got " +
                                std::to_string(budget));
  }
  double weight_sum = 0.0;
  double weighted_root = 0.0;
  for (const BetaEntry& e : entries) {
    if (!std::isfinite(e.weight) || e.weight <= 0.0 || !std::isfinite(e.phi) || e.phi <= 0.0) {
      throw InvalidParameterError("solve_beta: weights and priorities must be positive");
    }
    weight_sum += e.weight;
    weighted_root += e.weight * std::sqrt(e.phi);
  }
  const double sqrt_beta = weighted_root / (budget + weight_sum);
  return sqrt_beta * sqrt_beta;
}

AllocationResult allocate(const SystemConfig& config, const std::vector<int>& k) {
  check_binary_vector(config, k);
  const std::size_t n = config.size();

  AllocationResult out;
  out.c.assign(n, 0.0);
  out.active.assign(n, false);

  const double budget = config.rate_budget;
  if (budget == 0.0) return out;  // all-zero allocation; beta stays the invalid sentinel

  std::vector<double> phis(n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    phis[i] = phi(config.files[i], k[i] == 1);
    weights[i] = rate_weight(config.files[i], k[i] == 1);
  }

  std::vector<char> clamped(n, 0);
  double remaining = budget;

  for (;;) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clamped[i]) pool.push_back(i);
    }
    if (pool.empty()) {
      // Every file is uncached and pinned at u_i; the leftover budget has
      // nowhere to go and the rate constraint is slack.
      out.beta = 0.0;
      out.beta_valid = true;
      out.unspent = remaining;
      break;
    }
    if (remaining <= 0.0) {
      // Clamps consumed the budget exactly; unreachable in exact arithmetic
      // (each clamp strictly undershoots its candidate) but kept safe.
      double max_phi = 0.0;
      for (std::size_t i : pool) {
        out.c[i] = 0.0;
        max_phi = std::max(max_phi, phis[i]);
      }
      out.beta = max_phi;
      out.beta_valid = true;
      out.unspent = 0.0;
      break;
    }

    // Active-set loop: drop the lowest-priority file while it sits below the
    // water level, one file per iteration.
    std::vector<std::size_t> act = pool;
    double beta = 0.0;
    for (;;) {
      ++out.iterations;
      double weight_sum = 0.0;
      double weighted_root = 0.0;
      for (std::size_t i : act) {
        weight_sum += weights[i];
        weighted_root += weights[i] * std::sqrt(phis[i]);
      }
      const double sqrt_beta = weighted_root / (remaining + weight_sum);
      beta = sqrt_beta * sqrt_beta;

      std::size_t worst = 0;
      for (std::size_t j = 1; j < act.size(); ++j) {
        if (phis[act[j]] < phis[act[worst]]) worst = j;
      }
      if (act.size() > 1 && phis[act[worst]] < beta - kPhiTol) {
        act.erase(act.begin() + static_cast<std::ptrdiff_t>(worst));
      } else {
        break;
      }
    }
    out.beta = beta;
    out.beta_valid = true;

    const double sqrt_beta = std::sqrt(beta);
    for (std::size_t i : pool) out.c[i] = 0.0;
    for (std::size_t i : act) {
      out.c[i] = std::max(0.0, weights[i] * (std::sqrt(phis[i]) / sqrt_beta - 1.0));
    }

    ++out.iterations;  // clamp pass
    bool new_clamp = false;
    for (std::size_t i : act) {
      if (k[i] == 0 && out.c[i] > config.files[i].u) {
        clamped[i] = 1;
        out.c[i] = config.files[i].u;
        new_clamp = true;
      }
    }
    if (!new_clamp) break;

    remaining = budget;
    for (std::size_t i = 0; i < n; ++i) {
      if (clamped[i]) remaining -= config.files[i].u;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    out.active[i] = out.c[i] > 0.0;
    if (clamped[i]) out.clamped.push_back(i);
    const FileParams& f = config.files[i];
    out.objective += k[i] ? freshness_cached(f.lambda, f.u, out.c[i])
                          : freshness_uncached(f.lambda, f.s, out.c[i]);
  }
  return out;
}

GridResult grid_oracle(const SystemConfig& config, const std::vector<int>& k, double step) {
  check_binary_vector(config, k);
  const std::size_t n = config.size();
  if (n > 4) {
    throw InstanceTooLargeError("grid_oracle enumerates a full rate grid and supports n <= 4, got n = " +
                                std::to_string(n));
  }
  if (!std::isfinite(step) || step <= 0.0) {
    throw InvalidParameterError("grid step must be positive, got " + std::to_string(step));
  }

  GridResult best;
  best.c.assign(n, 0.0);
  best.objective = -1.0;
  std::vector<double> cur(n, 0.0);

  // Depth-first over grid multiples; the objective is accumulated per level.
  // Freshness terms are evaluated inline from the defining formulas so the
  // oracle shares no code path with allocate.
  auto recurse = [&](auto&& self, std::size_t depth, double remaining, double partial) -> void {
    if (depth == n) {
      if (partial > best.objective) {
        best.objective = partial;
        best.c = cur;
      }
      return;
    }
    const FileParams& f = config.files[depth];
    // remaining may carry -1e-17-scale dust after an exact-boundary spend;
    // m = 0 must stay enumerable so the branch still reaches a leaf
    double cap = std::max(remaining, 0.0);
    if (k[depth] == 0) cap = std::min(cap, f.u);
    const long max_steps = static_cast<long>(std::floor(cap / step + 1e-9));
    for (long m = 0; m <= max_steps; ++m) {
      const double ci = static_cast<double>(m) * step;
      cur[depth] = ci;
      double term;
      if (k[depth] == 1) {
        term = (f.u / (f.u + f.lambda)) * (ci / (ci + f.lambda));
      } else {
        term = ci == 0.0 ? 0.0 : ci * f.s / (ci * f.s + f.lambda * f.s + ci * f.lambda);
      }
      self(self, depth + 1, remaining - ci, partial + term);
    }
    cur[depth] = 0.0;
  };
  recurse(recurse, 0, config.rate_budget, 0.0);
  return best;
}

}  // namespace freshcache
