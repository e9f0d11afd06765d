#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "freshcache/experiment.hpp"

namespace {

// Exit codes: 0 ok, 2 invalid config, 3 infeasible instance, 4 internal error.
constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw freshcache::ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw freshcache::ConfigError("cannot write output file " + out_path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal cache placement and update-rate allocation for user freshness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 12345;
  unsigned threads = 0;
  bool allow_large = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output path (default: stdout)");
    sub->add_option("--seed", seed, "master seed for simulation streams");
    sub->add_option("--threads", threads, "worker thread cap (0 = available parallelism)");
    sub->add_flag("--allow-large", allow_large,
                  "lift the n <= 24 enumeration guard (exponential cost)");
  };

  CLI::App* solve = app.add_subcommand("solve", "optimal policy per (C, K) pair, JSON report");
  CLI::App* sweep = app.add_subcommand("sweep", "objective table over the (C, K) grid, CSV");
  CLI::App* simulate =
      app.add_subcommand("simulate", "validate closed forms against the simulator, CSV");
  CLI::App* oracle = app.add_subcommand("oracle", "allocate vs brute-force grid search, CSV");
  for (CLI::App* sub : {solve, sweep, simulate, oracle}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalidConfig;
  }

  try {
    const freshcache::ExperimentSpec spec = freshcache::parse_spec(read_file(config_path));
    freshcache::RunOptions opts;
    opts.seed = seed;
    opts.threads = threads;
    opts.allow_large = allow_large;
    if (allow_large) {
      std::cerr << "warning: enumeration guard lifted; candidate count grows as 2^n\n";
    }

    if (app.got_subcommand(solve)) {
      write_output(out_path, freshcache::run_solve(spec, opts));
    } else if (app.got_subcommand(sweep)) {
      write_output(out_path, freshcache::run_sweep(spec, opts));
    } else if (app.got_subcommand(simulate)) {
      write_output(out_path, freshcache::run_validate(spec, opts));
    } else {
      const freshcache::OracleOutcome outcome = freshcache::run_oracle(spec, opts);
      write_output(out_path, outcome.csv);
      std::cerr << "max discrepancy " << outcome.max_discrepancy << "\n";
    }
    return kExitOk;
  } catch (const freshcache::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const freshcache::InstanceTooLargeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const freshcache::FeasibilityError& e) {
    std::cerr << "infeasible instance: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const freshcache::InvalidParameterError& e) {
    std::cerr << "infeasible instance: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
