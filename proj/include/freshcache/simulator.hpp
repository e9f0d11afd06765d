#pragma once

#include <cstdint>
#include <vector>

#include "freshcache/model.hpp"
#include "freshcache/rng.hpp"

namespace freshcache {

struct SimConfig {
  double horizon = 1e5;          // simulated time per replication
  int replications = 8;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.05;  // in [0, 0.5); discarded transient

  void validate() const;
};

// Monte-Carlo estimate of a long-term average freshness.
struct FreshnessEstimate {
  double mean = 0.0;       // average freshness fraction over replications
  double std_error = 0.0;  // sample sd across replications / sqrt(replications)
  double fresh_time = 0.0; // accumulated fresh duration, all replications
  double total_time = 0.0; // accounted (post-warmup) duration
  std::uint64_t cycles = 0;  // completed stale -> fresh transitions
};

struct CachedSimResult {
  FreshnessEstimate user;
  FreshnessEstimate cache;   // freshness of the cache's own copy
  double user_stale_time = 0.0;
  double cache_stale_time = 0.0;
};

struct UncachedSimResult {
  FreshnessEstimate user;
  double stale_time = 0.0;
  std::uint64_t forwarded = 0;   // requests the cache forwarded to the source
  double forwarded_rate = 0.0;   // forwarded / accounted time
};

// Total delivery time of one source -> user transfer under the
// interruption-restart rule: attempts are Exp(s) and every source update
// (Exp(lambda)) restarts the transfer with the fresh file. The total is
// distributed Exp(s); this exists to let tests check that identity.
double transmission_time_sample(double s, double lambda, Xoshiro256pp& rng);

// Event model for a cached file: the source version bumps at rate lambda, the
// cache copies the source at rate c, the user copies the cache at rate u.
// Everything starts stale at t = 0. file_index selects the RNG stream.
CachedSimResult simulate_cached_detailed(const FileParams& file, double c,
                                         const SimConfig& sim,
                                         std::size_t file_index = 0,
                                         unsigned threads = 0);
FreshnessEstimate simulate_cached(const FileParams& file, double c,
                                  const SimConfig& sim,
                                  std::size_t file_index = 0,
                                  unsigned threads = 0);

// Event model for an uncached file: user requests arrive at rate u_rate and
// each is forwarded with probability c/u_rate (the forwarded count validates
// the thinning); a forwarded request that finds the user stale and no
// transfer in flight starts one, drawn via transmission_time_sample, and its
// completion delivers the version current at that instant. Requests arriving
// mid-transfer are ignored. Requires 0 <= c <= u_rate.
UncachedSimResult simulate_uncached_detailed(const FileParams& file, double c,
                                             double u_rate, const SimConfig& sim,
                                             std::size_t file_index = 0,
                                             unsigned threads = 0);
FreshnessEstimate simulate_uncached(const FileParams& file, double c,
                                    double u_rate, const SimConfig& sim,
                                    std::size_t file_index = 0,
                                    unsigned threads = 0);

// Sum of the per-file estimates; files are independent, so the variance of
// the total is the sum of the per-file variances.
struct SystemEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double fresh_time = 0.0;
  double total_time = 0.0;
};

struct SystemSimResult {
  std::vector<FreshnessEstimate> per_file;
  SystemEstimate total;
};

// Simulates every file of a feasible policy independently, routing by k_i.
// Streams are keyed by (seed, file index, replication); the result is
// identical for any thread count.
SystemSimResult simulate_system(const SystemConfig& config, const Policy& policy,
                                const SimConfig& sim, unsigned threads = 0);

}  // namespace freshcache
