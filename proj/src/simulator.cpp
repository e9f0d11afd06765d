#include "freshcache/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"

namespace freshcache {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_nonnegative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidParameterError(std::string(name) + " must be nonnegative and finite, got " +
                                std::to_string(v));
  }
}

// Raw tallies of a single replication.
struct RepAccum {
  double fresh = 0.0;
  double stale = 0.0;
  double span = 0.0;
  double cache_fresh = 0.0;
  double cache_stale = 0.0;
  std::uint64_t cycles = 0;
  std::uint64_t cache_cycles = 0;
  std::uint64_t forwarded = 0;
};

RepAccum run_cached_rep(const FileParams& f, double c, const SimConfig& sim,
                        Xoshiro256pp rng) {
  const double horizon = sim.horizon;
  const double window_start = sim.warmup_fraction * horizon;

  RepAccum acc;
  acc.span = horizon - window_start;

  // Versions: the source starts at 0 with both copies stale.
  long source_version = 0;
  long cache_version = -1;
  long user_version = -1;

  double t = 0.0;
  double next_source = rng.exponential(f.lambda);
  double next_cache = rng.exponential(c);
  double next_user = rng.exponential(f.u);

  auto account = [&](double from, double to) {
    const double a = std::max(from, window_start);
    const double b = std::min(to, horizon);
    if (b <= a) return;
    const double d = b - a;
    if (user_version == source_version) acc.fresh += d; else acc.stale += d;
    if (cache_version == source_version) acc.cache_fresh += d; else acc.cache_stale += d;
  };

  for (;;) {
    const double t_next = std::min({next_source, next_cache, next_user});
    if (t_next >= horizon) {
      account(t, horizon);
      break;
    }
    account(t, t_next);
    t = t_next;
    if (next_source <= next_cache && next_source <= next_user) {
      ++source_version;
      next_source = t + rng.exponential(f.lambda);
    } else if (next_cache <= next_user) {
      if (cache_version != source_version) {
        cache_version = source_version;
        if (t >= window_start) ++acc.cache_cycles;
      }
      next_cache = t + rng.exponential(c);
    } else {
      const bool was_fresh = user_version == source_version;
      user_version = cache_version;
      if (!was_fresh && user_version == source_version && t >= window_start) ++acc.cycles;
      next_user = t + rng.exponential(f.u);
    }
  }
  return acc;
}

RepAccum run_uncached_rep(const FileParams& f, double c, double u_rate,
                          const SimConfig& sim, Xoshiro256pp rng) {
  const double horizon = sim.horizon;
  const double window_start = sim.warmup_fraction * horizon;
  const double p = c / u_rate;

  RepAccum acc;
  acc.span = horizon - window_start;

  long source_version = 0;
  long user_version = -1;
  bool in_flight = false;

  double t = 0.0;
  double next_source = rng.exponential(f.lambda);
  double next_user = rng.exponential(u_rate);
  double transfer_end = kInf;

  auto account = [&](double from, double to) {
    const double a = std::max(from, window_start);
    const double b = std::min(to, horizon);
    if (b <= a) return;
    const double d = b - a;
    if (user_version == source_version) acc.fresh += d; else acc.stale += d;
  };

  for (;;) {
    const double t_next = std::min({next_source, next_user, transfer_end});
    if (t_next >= horizon) {
      account(t, horizon);
      break;
    }
    account(t, t_next);
    t = t_next;
    if (next_source <= next_user && next_source <= transfer_end) {
      ++source_version;
      next_source = t + rng.exponential(f.lambda);
    } else if (next_user <= transfer_end) {
      // Every request is thinned independently; the forwarded ones form a
      // Poisson process of rate c. Only a forwarded request that finds the
      // copy stale and the channel idle starts a transfer.
      if (p > 0.0 && rng.bernoulli(p)) {
        if (t >= window_start) ++acc.forwarded;
        if (!in_flight && user_version != source_version) {
          in_flight = true;
          transfer_end = t + transmission_time_sample(f.s, f.lambda, rng);
        }
      }
      next_user = t + rng.exponential(u_rate);
    } else {
      // Completion delivers the version current now: interrupted attempts
      // were restarted with the fresh file.
      user_version = source_version;
      in_flight = false;
      transfer_end = kInf;
      if (t >= window_start) ++acc.cycles;
    }
  }
  return acc;
}

FreshnessEstimate summarize(const std::vector<RepAccum>& reps, bool cache_side) {
  FreshnessEstimate est;
  const std::size_t n = reps.size();
  std::vector<double> fractions(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double fresh = cache_side ? reps[r].cache_fresh : reps[r].fresh;
    fractions[r] = reps[r].span > 0.0 ? fresh / reps[r].span : 0.0;
    est.fresh_time += fresh;
    est.total_time += reps[r].span;
    est.cycles += cache_side ? reps[r].cache_cycles : reps[r].cycles;
    est.mean += fractions[r];
  }
  est.mean /= static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double x : fractions) ss += (x - est.mean) * (x - est.mean);
    est.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return est;
}

std::vector<RepAccum> run_replications(const SimConfig& sim, unsigned threads,
                                       const std::function<RepAccum(Xoshiro256pp)>& body,
                                       std::uint64_t file_index) {
  std::vector<RepAccum> reps(static_cast<std::size_t>(sim.replications));
  detail::parallel_chunks(reps.size(), threads,
                          [&](unsigned, std::size_t first, std::size_t last) {
                            for (std::size_t r = first; r < last; ++r) {
                              reps[r] = body(Xoshiro256pp::stream(sim.seed, file_index, r));
                            }
                          });
  return reps;
}

}  // namespace

void SimConfig::validate() const {
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw InvalidParameterError("sim horizon must be positive, got " + std::to_string(horizon));
  }
  if (replications < 1) {
    throw InvalidParameterError("sim replications must be >= 1, got " +
                                std::to_string(replications));
  }
  if (!std::isfinite(warmup_fraction) || warmup_fraction < 0.0 || warmup_fraction >= 0.5) {
    throw InvalidParameterError("sim warmup_fraction must lie in [0, 0.5), got " +
                                std::to_string(warmup_fraction));
  }
}

double transmission_time_sample(double s, double lambda, Xoshiro256pp& rng) {
  if (!std::isfinite(s) || s <= 0.0 || !std::isfinite(lambda) || lambda <= 0.0) {
    throw InvalidParameterError("transmission_time_sample requires positive rates");
  }
  double total = 0.0;
  for (;;) {
    const double attempt = rng.exponential(s);
    const double next_update = rng.exponential(lambda);
    if (next_update < attempt) {
      total += next_update;  // interrupted; restart with the fresh file
    } else {
      return total + attempt;
    }
  }
}

CachedSimResult simulate_cached_detailed(const FileParams& file, double c,
                                         const SimConfig& sim, std::size_t file_index,
                                         unsigned threads) {
  sim.validate();
  require_finite_nonnegative(c, "c");
  const auto reps = run_replications(
      sim, threads, [&](Xoshiro256pp rng) { return run_cached_rep(file, c, sim, std::move(rng)); },
      file_index);
  CachedSimResult result;
  result.user = summarize(reps, false);
  result.cache = summarize(reps, true);
  for (const RepAccum& r : reps) {
    result.user_stale_time += r.stale;
    result.cache_stale_time += r.cache_stale;
  }
  return result;
}

FreshnessEstimate simulate_cached(const FileParams& file, double c, const SimConfig& sim,
                                  std::size_t file_index, unsigned threads) {
  return simulate_cached_detailed(file, c, sim, file_index, threads).user;
}

UncachedSimResult simulate_uncached_detailed(const FileParams& file, double c, double u_rate,
                                             const SimConfig& sim, std::size_t file_index,
                                             unsigned threads) {
  sim.validate();
  require_finite_nonnegative(c, "c");
  if (!std::isfinite(u_rate) || u_rate <= 0.0) {
    throw InvalidParameterError("u_rate must be positive, got " + std::to_string(u_rate));
  }
  if (c > u_rate) {
    throw InvalidParameterError("c = " + std::to_string(c) + " exceeds the user request rate u = " +
                                std::to_string(u_rate) +
                                "; the cache only forwards user requests");
  }
  const auto reps = run_replications(
      sim, threads,
      [&](Xoshiro256pp rng) { return run_uncached_rep(file, c, u_rate, sim, std::move(rng)); },
      file_index);
  UncachedSimResult result;
  result.user = summarize(reps, false);
  for (const RepAccum& r : reps) {
    result.stale_time += r.stale;
    result.forwarded += r.forwarded;
  }
  result.forwarded_rate =
      result.user.total_time > 0.0 ? static_cast<double>(result.forwarded) / result.user.total_time : 0.0;
  return result;
}

FreshnessEstimate simulate_uncached(const FileParams& file, double c, double u_rate,
                                    const SimConfig& sim, std::size_t file_index,
                                    unsigned threads) {
  return simulate_uncached_detailed(file, c, u_rate, sim, file_index, threads).user;
}

SystemSimResult simulate_system(const SystemConfig& config, const Policy& policy,
                                const SimConfig& sim, unsigned threads) {
  sim.validate();
  policy.validate(config);
  const std::size_t n = config.size();
  const std::size_t reps = static_cast<std::size_t>(sim.replications);

  // (file, replication) tasks with per-task streams; slots keep aggregation
  // independent of scheduling.
  std::vector<RepAccum> slots(n * reps);
  detail::parallel_chunks(slots.size(), threads,
                          [&](unsigned, std::size_t first, std::size_t last) {
                            for (std::size_t task = first; task < last; ++task) {
                              const std::size_t i = task / reps;
                              const std::size_t r = task % reps;
                              Xoshiro256pp rng = Xoshiro256pp::stream(sim.seed, i, r);
                              slots[task] =
                                  policy.k[i] ? run_cached_rep(config.files[i], policy.c[i], sim,
                                                               std::move(rng))
                                              : run_uncached_rep(config.files[i], policy.c[i],
                                                                 config.files[i].u, sim,
                                                                 std::move(rng));
                            }
                          });

  SystemSimResult result;
  result.per_file.reserve(n);
  double variance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<RepAccum> file_reps(slots.begin() + static_cast<std::ptrdiff_t>(i * reps),
                                    slots.begin() + static_cast<std::ptrdiff_t>((i + 1) * reps));
    FreshnessEstimate est = summarize(file_reps, false);
    result.total.mean += est.mean;
    result.total.fresh_time += est.fresh_time;
    result.total.total_time += est.total_time;
    variance += est.std_error * est.std_error;
    result.per_file.push_back(std::move(est));
  }
  result.total.std_error = std::sqrt(variance);
  return result;
}

}  // namespace freshcache
