#include "freshcache/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "freshcache/allocator.hpp"
#include "freshcache/selector.hpp"

namespace freshcache {
namespace {

using nlohmann::json;

// All emitted floats carry 9 significant digits for reproducible outputs.
std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double require_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

int require_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<int>();
}

std::vector<double> require_number_array(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + " must be a nonempty array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(require_number(v, where + " entry"));
  return out;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return item.key() == k;
        }) == known.end()) {
      throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

RateFamily parse_family(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object with sum and ratio");
  reject_unknown_keys(j, {"sum", "ratio"}, where);
  if (!j.contains("sum") || !j.contains("ratio")) {
    throw ConfigError(where + " requires sum and ratio");
  }
  RateFamily fam;
  fam.sum = require_number(j.at("sum"), where + ".sum");
  fam.ratio = require_number(j.at("ratio"), where + ".ratio");
  return fam;
}

std::string k_bitstring(const std::vector<int>& k) {
  std::string s;
  s.reserve(k.size());
  for (int v : k) s.push_back(v ? '1' : '0');
  return s;
}

std::string joined_cached_indices(const std::vector<int>& k) {
  std::string s;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!k[i]) continue;
    if (!s.empty()) s.push_back(';');
    s += std::to_string(i + 1);
  }
  return s;
}

// Same candidate order as selector::optimize; used by the oracle table.
std::vector<std::vector<int>> feasible_k_vectors(std::size_t n, int capacity) {
  std::vector<std::vector<int>> out;
  for (int m = 0; m <= capacity; ++m) {
    std::vector<std::uint64_t> masks;
    if (m == 0) {
      masks.push_back(0);
    } else {
      const std::uint64_t limit = std::uint64_t{1} << n;
      std::uint64_t v = (std::uint64_t{1} << m) - 1;
      while (v < limit) {
        masks.push_back(v);
        const std::uint64_t t = v | (v - 1);
        if (t + 1 >= limit) break;
        v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
      }
    }
    for (std::uint64_t mask : masks) {
      std::vector<int> k(n, 0);
      for (std::size_t j = 0; j < n; ++j) k[j] = static_cast<int>((mask >> (n - 1 - j)) & 1);
      out.push_back(std::move(k));
    }
  }
  return out;
}

}  // namespace

std::vector<double> geometric_rates(double total, double ratio, int n) {
  if (!std::isfinite(total) || total <= 0.0) {
    throw InvalidParameterError("geometric total must be positive, got " + std::to_string(total));
  }
  if (!std::isfinite(ratio) || ratio <= 0.0) {
    throw InvalidParameterError("geometric ratio must be positive, got " + std::to_string(ratio));
  }
  if (n < 1) throw InvalidParameterError("geometric n must be >= 1, got " + std::to_string(n));

  std::vector<double> rates(static_cast<std::size_t>(n));
  if (ratio == 1.0) {
    std::fill(rates.begin(), rates.end(), total / n);
    return rates;
  }
  double power = 1.0;
  double denom = 0.0;
  for (int i = 1; i <= n; ++i) {
    power *= ratio;
    denom += power;
  }
  const double base = total / denom;
  power = 1.0;
  for (int i = 1; i <= n; ++i) {
    power *= ratio;
    rates[static_cast<std::size_t>(i - 1)] = base * power;
  }
  return rates;
}

ExperimentSpec parse_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(j, {"files", "C", "K", "sim", "oracle"}, "config");

  ExperimentSpec spec;

  if (!j.contains("files") || !j.at("files").is_object()) {
    throw ConfigError("config requires a files object");
  }
  const json& files = j.at("files");
  reject_unknown_keys(files, {"explicit", "geometric"}, "files");
  const bool has_explicit = files.contains("explicit");
  const bool has_geometric = files.contains("geometric");
  if (has_explicit == has_geometric) {
    throw ConfigError("files requires exactly one of explicit or geometric");
  }
  if (has_explicit) {
    const json& e = files.at("explicit");
    if (!e.is_object()) throw ConfigError("files.explicit must be an object");
    reject_unknown_keys(e, {"lambda", "u", "s"}, "files.explicit");
    if (!e.contains("lambda") || !e.contains("u") || !e.contains("s")) {
      throw ConfigError("files.explicit requires lambda, u and s arrays");
    }
    ExplicitRates rates;
    rates.lambda = require_number_array(e.at("lambda"), "files.explicit.lambda");
    rates.u = require_number_array(e.at("u"), "files.explicit.u");
    rates.s = require_number_array(e.at("s"), "files.explicit.s");
    if (rates.lambda.size() != rates.u.size() || rates.lambda.size() != rates.s.size()) {
      throw ConfigError("files.explicit arrays must have equal lengths");
    }
    spec.files = std::move(rates);
  } else {
    const json& g = files.at("geometric");
    if (!g.is_object()) throw ConfigError("files.geometric must be an object");
    reject_unknown_keys(g, {"n", "lambda", "u", "s"}, "files.geometric");
    if (!g.contains("n") || !g.contains("lambda") || !g.contains("u") || !g.contains("s")) {
      throw ConfigError("files.geometric requires n, lambda, u and s");
    }
    GeometricRates rates;
    rates.n = require_int(g.at("n"), "files.geometric.n");
    rates.lambda = parse_family(g.at("lambda"), "files.geometric.lambda");
    rates.u = parse_family(g.at("u"), "files.geometric.u");
    rates.s = parse_family(g.at("s"), "files.geometric.s");
    spec.files = rates;
  }

  if (!j.contains("C") || !j.contains("K")) throw ConfigError("config requires C and K arrays");
  spec.budgets = require_number_array(j.at("C"), "C");
  if (!j.at("K").is_array() || j.at("K").empty()) throw ConfigError("K must be a nonempty array");
  for (const auto& v : j.at("K")) spec.capacities.push_back(require_int(v, "K entry"));

  if (j.contains("sim")) {
    const json& s = j.at("sim");
    if (!s.is_object()) throw ConfigError("sim must be an object");
    reject_unknown_keys(s, {"horizon", "replications", "warmup_fraction"}, "sim");
    if (!s.contains("horizon") || !s.contains("replications")) {
      throw ConfigError("sim requires horizon and replications");
    }
    SimConfig sim;
    sim.horizon = require_number(s.at("horizon"), "sim.horizon");
    sim.replications = require_int(s.at("replications"), "sim.replications");
    if (s.contains("warmup_fraction")) {
      sim.warmup_fraction = require_number(s.at("warmup_fraction"), "sim.warmup_fraction");
    }
    try {
      sim.validate();
    } catch (const InvalidParameterError& e) {
      throw ConfigError(e.what());
    }
    spec.sim = sim;
  }

  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    if (!o.is_object()) throw ConfigError("oracle must be an object");
    reject_unknown_keys(o, {"step"}, "oracle");
    if (o.contains("step")) spec.oracle_step = require_number(o.at("step"), "oracle.step");
    if (!std::isfinite(spec.oracle_step) || spec.oracle_step <= 0.0) {
      throw ConfigError("oracle.step must be positive");
    }
  }

  try {
    build_files(spec);  // surface rate/shape problems at parse time
  } catch (const InvalidParameterError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

std::string emit_spec(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "{\n  \"files\": {";
  if (const auto* e = std::get_if<ExplicitRates>(&spec.files)) {
    auto emit_array = [&](const char* name, const std::vector<double>& v, bool last) {
      out << "\"" << name << "\": [";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        out << fmt9(v[i]);
      }
      out << (last ? "]" : "], ");
    };
    out << "\"explicit\": {";
    emit_array("lambda", e->lambda, false);
    emit_array("u", e->u, false);
    emit_array("s", e->s, true);
    out << "}";
  } else {
    const auto& g = std::get<GeometricRates>(spec.files);
    auto emit_family = [&](const char* name, const RateFamily& f, bool last) {
      out << "\"" << name << "\": {\"sum\": " << fmt9(f.sum) << ", \"ratio\": " << fmt9(f.ratio)
          << (last ? "}" : "}, ");
    };
    out << "\"geometric\": {\"n\": " << g.n << ", ";
    emit_family("lambda", g.lambda, false);
    emit_family("u", g.u, false);
    emit_family("s", g.s, true);
    out << "}";
  }
  out << "},\n  \"C\": [";
  for (std::size_t i = 0; i < spec.budgets.size(); ++i) {
    if (i) out << ", ";
    out << fmt9(spec.budgets[i]);
  }
  out << "],\n  \"K\": [";
  for (std::size_t i = 0; i < spec.capacities.size(); ++i) {
    if (i) out << ", ";
    out << spec.capacities[i];
  }
  out << "]";
  if (spec.sim) {
    out << ",\n  \"sim\": {\"horizon\": " << fmt9(spec.sim->horizon)
        << ", \"replications\": " << spec.sim->replications
        << ", \"warmup_fraction\": " << fmt9(spec.sim->warmup_fraction) << "}";
  }
  if (spec.oracle_step != 0.005) {
    out << ",\n  \"oracle\": {\"step\": " << fmt9(spec.oracle_step) << "}";
  }
  out << "\n}\n";
  return out.str();
}

std::vector<FileParams> build_files(const ExperimentSpec& spec) {
  std::vector<FileParams> files;
  if (const auto* e = std::get_if<ExplicitRates>(&spec.files)) {
    for (std::size_t i = 0; i < e->lambda.size(); ++i) {
      files.emplace_back(e->lambda[i], e->u[i], e->s[i]);
    }
  } else {
    const auto& g = std::get<GeometricRates>(spec.files);
    const auto lambdas = geometric_rates(g.lambda.sum, g.lambda.ratio, g.n);
    const auto us = geometric_rates(g.u.sum, g.u.ratio, g.n);
    const auto ss = geometric_rates(g.s.sum, g.s.ratio, g.n);
    for (int i = 0; i < g.n; ++i) {
      files.emplace_back(lambdas[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)],
                         ss[static_cast<std::size_t>(i)]);
    }
  }
  return files;
}

std::string run_solve(const ExperimentSpec& spec, const RunOptions& opts) {
  const auto files = build_files(spec);
  std::ostringstream out;
  out << "{\n  \"results\": [";
  bool first = true;
  for (double C : spec.budgets) {
    for (int K : spec.capacities) {
      const SystemConfig config(files, K, C);
      const SelectionResult sel = optimize(config, opts.threads, opts.allow_large);
      if (!first) out << ",";
      first = false;
      out << "\n    {\"C\": " << fmt9(C) << ", \"K\": " << K
          << ", \"objective\": " << fmt9(sel.objective)
          << ", \"explored\": " << sel.explored << ",\n     \"beta\": ";
      if (sel.allocation.beta_valid) {
        out << fmt9(sel.allocation.beta);
      } else {
        out << "null";
      }
      out << ", \"unspent\": " << fmt9(sel.allocation.unspent) << ",\n     \"cached_indices\": [";
      bool first_idx = true;
      for (std::size_t i = 0; i < sel.k.size(); ++i) {
        if (!sel.k[i]) continue;
        if (!first_idx) out << ", ";
        first_idx = false;
        out << (i + 1);
      }
      out << "],\n     \"files\": [";
      for (std::size_t i = 0; i < sel.k.size(); ++i) {
        const FileParams& f = files[i];
        const double freshness = sel.k[i]
                                     ? freshness_cached(f.lambda, f.u, sel.allocation.c[i])
                                     : freshness_uncached(f.lambda, f.s, sel.allocation.c[i]);
        if (i) out << ",";
        out << "\n       {\"file\": " << (i + 1) << ", \"k\": " << sel.k[i]
            << ", \"c\": " << fmt9(sel.allocation.c[i]) << ", \"freshness\": " << fmt9(freshness)
            << "}";
      }
      out << "\n     ]}";
    }
  }
  out << "\n  ]\n}\n";
  return out.str();
}

std::string run_sweep(const ExperimentSpec& spec, const RunOptions& opts) {
  const auto files = build_files(spec);
  std::ostringstream out;
  out << "C,K,objective,cached_count,cached_indices,explored\n";

  std::map<double, std::map<int, double>> by_budget;  // C -> K -> objective
  for (double C : spec.budgets) {
    for (int K : spec.capacities) {
      const SystemConfig config(files, K, C);
      const SelectionResult sel = optimize(config, opts.threads, opts.allow_large);
      int cached = 0;
      for (int v : sel.k) cached += v;
      out << fmt9(C) << "," << K << "," << fmt9(sel.objective) << "," << cached << ","
          << joined_cached_indices(sel.k) << "," << sel.explored << "\n";
      by_budget[C][K] = sel.objective;
    }
  }

  // The feasible set only grows with K and with C.
  constexpr double slack = 1e-9;
  for (const auto& [C, row] : by_budget) {
    double prev = -1.0;
    for (const auto& [K, objective] : row) {
      if (objective < prev - slack) {
        throw InternalError("sweep objective decreased in K at C = " + fmt9(C) +
                            ", K = " + std::to_string(K));
      }
      prev = std::max(prev, objective);
    }
  }
  std::map<int, std::map<double, double>> by_capacity;
  for (const auto& [C, row] : by_budget) {
    for (const auto& [K, objective] : row) by_capacity[K][C] = objective;
  }
  for (const auto& [K, row] : by_capacity) {
    double prev = -1.0;
    for (const auto& [C, objective] : row) {
      if (objective < prev - slack) {
        throw InternalError("sweep objective decreased in C at K = " + std::to_string(K) +
                            ", C = " + fmt9(C));
      }
      prev = std::max(prev, objective);
    }
  }
  return out.str();
}

std::string run_validate(const ExperimentSpec& spec, const RunOptions& opts,
                         double analytic_offset) {
  if (!spec.sim) throw ConfigError("simulate mode requires a sim section in the config");
  const auto files = build_files(spec);
  SimConfig sim = *spec.sim;
  sim.seed = opts.seed;

  std::ostringstream out;
  out << "file,k,c,analytic,simulated,stderr,z,flag\n";
  for (double C : spec.budgets) {
    for (int K : spec.capacities) {
      const SystemConfig config(files, K, C);
      const SelectionResult sel = optimize(config, opts.threads, opts.allow_large);
      const Policy policy{sel.k, sel.allocation.c};
      const SystemSimResult sim_result = simulate_system(config, policy, sim, opts.threads);
      for (std::size_t i = 0; i < files.size(); ++i) {
        const FileParams& f = files[i];
        const double analytic =
            (sel.k[i] ? freshness_cached(f.lambda, f.u, sel.allocation.c[i])
                      : freshness_uncached(f.lambda, f.s, sel.allocation.c[i])) +
            analytic_offset;
        const FreshnessEstimate& est = sim_result.per_file[i];
        const double diff = est.mean - analytic;
        double z = std::numeric_limits<double>::quiet_NaN();
        bool flagged = false;
        if (est.std_error > 0.0) {
          z = diff / est.std_error;
          flagged = std::fabs(z) > 4.0;
        } else {
          // Degenerate spread: identical replications. Pass exact agreement,
          // flag anything else.
          flagged = std::fabs(diff) > 1e-12;
        }
        out << (i + 1) << "," << sel.k[i] << "," << fmt9(sel.allocation.c[i]) << ","
            << fmt9(analytic) << "," << fmt9(est.mean) << "," << fmt9(est.std_error) << ","
            << fmt9(z) << "," << (flagged ? 1 : 0) << "\n";
      }
    }
  }
  return out.str();
}

OracleOutcome run_oracle(const ExperimentSpec& spec, const RunOptions& opts) {
  (void)opts;
  const auto files = build_files(spec);
  if (files.size() > 4) {
    throw InstanceTooLargeError("oracle mode supports n <= 4 files, got n = " +
                                std::to_string(files.size()));
  }

  OracleOutcome outcome;
  outcome.max_discrepancy = -std::numeric_limits<double>::infinity();
  std::ostringstream out;
  out << "C,K,k,allocate_objective,grid_objective,discrepancy\n";
  for (double C : spec.budgets) {
    for (int K : spec.capacities) {
      const SystemConfig config(files, K, C);
      for (const auto& k : feasible_k_vectors(files.size(), K)) {
        const AllocationResult a = allocate(config, k);
        const GridResult g = grid_oracle(config, k, spec.oracle_step);
        const double discrepancy = a.objective - g.objective;
        outcome.max_discrepancy = std::max(outcome.max_discrepancy, discrepancy);
        out << fmt9(C) << "," << K << "," << k_bitstring(k) << "," << fmt9(a.objective) << ","
            << fmt9(g.objective) << "," << fmt9(discrepancy) << "\n";
      }
    }
  }
  outcome.csv = out.str();
  return outcome;
}

}  // namespace freshcache
