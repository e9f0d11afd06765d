#include "freshcache/model.hpp"

#include <cmath>
#include <string>

namespace freshcache {
namespace {

constexpr double kFeasibilitySlack = 1e-9;

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidParameterError(std::string(name) + " must be positive and finite, got " +
                                std::to_string(v));
  }
}

void require_nonnegative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidParameterError(std::string(name) + " must be nonnegative and finite, got " +
                                std::to_string(v));
  }
}

}  // namespace

FileParams::FileParams(double lambda_in, double u_in, double s_in)
    : lambda(lambda_in), u(u_in), s(s_in) {
  require_positive(lambda, "lambda");
  require_positive(u, "u");
  require_positive(s, "s");
}

SystemConfig::SystemConfig(std::vector<FileParams> files_in, int cache_capacity_in,
                           double rate_budget_in)
    : files(std::move(files_in)),
      cache_capacity(cache_capacity_in),
      rate_budget(rate_budget_in) {
  if (files.empty()) throw InvalidParameterError("SystemConfig requires at least one file");
  if (cache_capacity < 0 || static_cast<std::size_t>(cache_capacity) > files.size()) {
    throw InvalidParameterError("cache capacity K = " + std::to_string(cache_capacity) +
                                " must satisfy 0 <= K <= n = " + std::to_string(files.size()));
  }
  require_nonnegative(rate_budget, "rate budget C");
}

void Policy::validate(const SystemConfig& config) const {
  const std::size_t n = config.size();
  if (k.size() != n || c.size() != n) {
    throw DimensionMismatchError("policy vectors have lengths " + std::to_string(k.size()) +
                                 "/" + std::to_string(c.size()) + ", expected " +
                                 std::to_string(n));
  }
  long cached = 0;
  double rate_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k[i] != 0 && k[i] != 1) {
      throw InvalidParameterError("k[" + std::to_string(i + 1) + "] = " + std::to_string(k[i]) +
                                  " is not a binary caching status");
    }
    cached += k[i];
    if (!std::isfinite(c[i]) || c[i] < 0.0) {
      throw FeasibilityError("c[" + std::to_string(i + 1) + "] = " + std::to_string(c[i]) +
                             " violates c_i >= 0");
    }
    if (k[i] == 0 && c[i] > config.files[i].u + kFeasibilitySlack) {
      throw FeasibilityError("c[" + std::to_string(i + 1) + "] = " + std::to_string(c[i]) +
                             " exceeds u[" + std::to_string(i + 1) + "] = " +
                             std::to_string(config.files[i].u) + " for an uncached file");
    }
    rate_sum += c[i];
  }
  if (cached > config.cache_capacity) {
    throw FeasibilityError("sum(k) = " + std::to_string(cached) + " exceeds cache capacity K = " +
                           std::to_string(config.cache_capacity));
  }
  if (rate_sum > config.rate_budget + kFeasibilitySlack) {
    throw FeasibilityError("sum(c) = " + std::to_string(rate_sum) + " exceeds rate budget C = " +
                           std::to_string(config.rate_budget));
  }
}

double freshness_cached(double lambda, double u, double c) {
  require_positive(lambda, "lambda");
  require_positive(u, "u");
  require_nonnegative(c, "c");
  return (u / (u + lambda)) * (c / (c + lambda));
}

double freshness_uncached(double lambda, double s, double c) {
  require_positive(lambda, "lambda");
  require_positive(s, "s");
  require_nonnegative(c, "c");
  if (c == 0.0) return 0.0;
  // c*s keeps the denominator well scaled for ordinary inputs; for extreme c
  // the form divided through by c avoids overflow. Both agree to 1e-12.
  if (c > 1e150) return s / (s + lambda + lambda * s / c);
  return c * s / (c * s + lambda * s + c * lambda);
}

double total_freshness(const SystemConfig& config, const Policy& policy) {
  policy.validate(config);
  double total = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const FileParams& f = config.files[i];
    total += policy.k[i] ? freshness_cached(f.lambda, f.u, policy.c[i])
                         : freshness_uncached(f.lambda, f.s, policy.c[i]);
  }
  return total;
}

bool caching_preference(double lambda, double u, double s, double c) {
  require_positive(lambda, "lambda");
  require_positive(u, "u");
  require_positive(s, "s");
  require_nonnegative(c, "c");
  return c / (c + lambda) > s / u;
}

}  // namespace freshcache
