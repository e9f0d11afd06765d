#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "freshcache/simulator.hpp"

namespace freshcache {

struct ExplicitRates {
  std::vector<double> lambda;
  std::vector<double> u;
  std::vector<double> s;
};

struct RateFamily {
  double sum = 0.0;
  double ratio = 0.0;
};

struct GeometricRates {
  int n = 0;
  RateFamily lambda;
  RateFamily u;
  RateFamily s;
};

// Parsed experiment configuration (see README for the JSON schema).
struct ExperimentSpec {
  std::variant<ExplicitRates, GeometricRates> files;
  std::vector<double> budgets;    // C values
  std::vector<int> capacities;    // K values
  std::optional<SimConfig> sim;   // seed is supplied at run time
  double oracle_step = 0.005;
};

// Rates base*ratio^i for i = 1..n with base chosen so the rates sum to total;
// ratio == 1 splits uniformly.
std::vector<double> geometric_rates(double total, double ratio, int n);

ExperimentSpec parse_spec(const std::string& json_text);

// Canonical re-emission; emit(parse(emit(parse(x)))) == emit(parse(x)).
std::string emit_spec(const ExperimentSpec& spec);

std::vector<FileParams> build_files(const ExperimentSpec& spec);

struct RunOptions {
  std::uint64_t seed = 12345;
  unsigned threads = 0;       // 0 = available parallelism
  bool allow_large = false;   // lifts the n <= 24 enumeration guard
};

// Optimal policy per (C, K) pair as a JSON report.
std::string run_solve(const ExperimentSpec& spec, const RunOptions& opts);

// One CSV row per (C, K) pair. Verifies after emission that the objective is
// nondecreasing in K for fixed C and in C for fixed K; throws InternalError
// otherwise.
std::string run_sweep(const ExperimentSpec& spec, const RunOptions& opts);

// Per-file comparison of the simulator against the closed forms at the
// optimal policy of each (C, K) pair; |z| > 4 rows are flagged.
// analytic_offset shifts the analytic column and exists for detector tests.
std::string run_validate(const ExperimentSpec& spec, const RunOptions& opts,
                         double analytic_offset = 0.0);

struct OracleOutcome {
  std::string csv;
  double max_discrepancy = 0.0;  // max over rows of allocate - grid objective
};

// allocate vs grid_oracle on every k with sum(k) <= K, per (C, K) pair.
OracleOutcome run_oracle(const ExperimentSpec& spec, const RunOptions& opts);

}  // namespace freshcache
