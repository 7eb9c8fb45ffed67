// anneal.hpp
// Simulated annealing over switching orders.
//
// Per iteration k = 1..k_max:
//   1. propose eta' = Update(eta)            (RNG: one distinct slot pair)
//   2. accept if exp((f(eta) - f(eta')) / T) > u, u ~ U[0,1)   (RNG: one uniform)
//   3. T = T0 * alpha^k
// The acceptance test is the literal rule, not capped at 1; it accepts every
// improvement and behaves like Metropolis otherwise. The result is the final
// state, not the best one seen; the best is reported alongside in the trace.

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ambiguity.hpp"
#include "core.hpp"
#include "rng.hpp"
#include "switching.hpp"

namespace sounder {

enum class UpdateKind { Random, Hybrid };

inline std::string to_string(UpdateKind u) { return u == UpdateKind::Random ? "random" : "hybrid"; }

struct AnnealConfig {
  std::optional<double> t0;     // default: 0.1 * |f(init)|
  std::optional<double> alpha;  // default: (1e-4)^(1/k_max)
  std::size_t k_max = 200;
  std::uint64_t seed = 0;
  UpdateKind update = UpdateKind::Random;
};

inline double temperature_schedule(double t0, double alpha, std::size_t k) {
  return t0 * std::pow(alpha, static_cast<double>(k));
}

inline double default_alpha(std::size_t k_max) { return std::pow(1e-4, 1.0 / static_cast<double>(k_max)); }

struct AnnealRecord {
  std::size_t k = 0;                // 1-based iteration
  double objective = 0.0;           // f of the current sequence after the decision
  double proposal_objective = 0.0;  // f of the proposal
  double temperature = 0.0;         // T used in this iteration's test
  bool accepted = false;
  std::vector<std::size_t> order;   // current order after the decision
};

struct AnnealTrace {
  double t0 = 0.0;
  double alpha = 0.0;
  double initial_objective = 0.0;
  std::vector<AnnealRecord> records;
  double best_objective = 0.0;
  std::size_t best_iteration = 0;  // 0 = the initial sequence
  std::optional<SwitchingSequence> best;
  double wall_seconds = 0.0;
};

struct AnnealResult {
  SwitchingSequence sequence;
  AnnealTrace trace;
};

/// Partial trace of a run whose objective evaluation failed.
struct AnnealAborted : NumericError {
  AnnealAborted(const std::string& what, AnnealTrace partial) : NumericError(what), trace(std::move(partial)) {}
  AnnealTrace trace;
};

inline void validate(const AnnealConfig& cfg, const SwitchingSequence& init) {
  require(cfg.k_max >= 1, "k_max must be >= 1");
  if (cfg.t0) require(*cfg.t0 > 0.0 && std::isfinite(*cfg.t0), "T0 must be positive");
  if (cfg.alpha) require(*cfg.alpha > 0.0 && *cfg.alpha < 1.0, "cooling rate alpha must lie in (0, 1)");
  require(init.size() >= 2, "annealing needs at least two antennas");
  if (cfg.update == UpdateKind::Hybrid) {
    require(init.partition().has_value(), "hybrid update requires a partitioned initial sequence");
    require(init.satisfies_hybrid(), "initial sequence violates the hybrid subset constraint");
  }
}

// `objective` maps a sequence to f_P; any exception it throws aborts the run
// with AnnealAborted carrying the trace so far.
template <typename Objective>
AnnealResult anneal(const SwitchingSequence& init, const AnnealConfig& cfg, Objective&& objective) {
  validate(cfg, init);
  const auto started = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  AnnealTrace trace;
  trace.records.reserve(cfg.k_max);

  auto eval = [&](const SwitchingSequence& s) -> double {
    try {
      return static_cast<double>(objective(s));
    } catch (const std::exception& e) {
      trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      throw AnnealAborted(std::string("objective evaluation failed: ") + e.what(), trace);
    }
  };

  SwitchingSequence current = init;
  double f_current = eval(current);
  trace.initial_objective = f_current;
  trace.t0 = cfg.t0.value_or(0.1 * std::abs(f_current));
  require(trace.t0 > 0.0, "cannot derive T0 from a zero initial objective; set t0 explicitly");
  trace.alpha = cfg.alpha.value_or(default_alpha(cfg.k_max));
  trace.best_objective = f_current;
  trace.best = current;

  for (std::size_t k = 1; k <= cfg.k_max; ++k) {
    const double temperature = temperature_schedule(trace.t0, trace.alpha, k - 1);
    SwitchingSequence proposal =
        cfg.update == UpdateKind::Random ? swap_random(current, rng) : swap_hybrid(current, k - 1, rng);
    const double f_proposal = eval(proposal);
    const double u = rng.uniform01();
    const bool accepted = std::exp((f_current - f_proposal) / temperature) > u;
    if (accepted) {
      current = std::move(proposal);
      f_current = f_proposal;
    }
    if (f_current < trace.best_objective) {
      trace.best_objective = f_current;
      trace.best_iteration = k;
      trace.best = current;
    }
    trace.records.push_back({k, f_current, f_proposal, temperature, accepted, current.order()});
  }
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {std::move(current), std::move(trace)};
}

inline AnnealResult anneal(const SwitchingSequence& init, const AnnealConfig& cfg, const ObjectiveEvaluator& f) {
  return anneal(init, cfg, [&f](const SwitchingSequence& s) { return f.evaluate(s).value; });
}

inline AnnealResult anneal(const SwitchingSequence& init, const AnnealConfig& cfg, const ArrayModel& array,
                           const Region& region, const ObjectiveConfig& objective_cfg) {
  const ObjectiveEvaluator f = make_objective(array, init, region, objective_cfg);
  return anneal(init, cfg, f);
}

inline void write_trace_csv(const AnnealTrace& trace, std::ostream& out) {
  out << "k,objective,proposal_objective,temperature,accepted\n";
  out.precision(17);
  for (const auto& r : trace.records)
    out << r.k << ',' << r.objective << ',' << r.proposal_objective << ',' << r.temperature << ','
        << (r.accepted ? 1 : 0) << '\n';
}

}  // namespace sounder
