#include "hydro/ccg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hydro/balancing.hpp"
#include "hydro/composite.hpp"
#include "hydro/csv.hpp"

namespace hydro {

namespace {

struct MasterSolution {
  Schedule schedule;
  double objective = 0.0;
  double theta = 0.0;
};

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

CcgResult run_ccg(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios, double beta,
                  const UncertaintySet& set, const CcgOptions& options, const DayAheadConfig& config) {
  const std::size_t T = system.periods();
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("CCG tolerance must be positive");
  if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(set.lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be positive");
  if (set.gamma < 0 || static_cast<std::size_t>(set.gamma) > T)
    throw std::invalid_argument("gamma must lie in [0, T]");

  std::vector<std::vector<double>> robust;
  for (const auto& d : options.warm_start) {
    if (d.size() != T) throw std::invalid_argument("warm-start scenario has the wrong length");
    if (!contains(set, d)) throw std::invalid_argument("warm-start scenario lies outside the uncertainty set");
    if (std::find(robust.begin(), robust.end(), d) == robust.end()) robust.push_back(d);
  }

  std::vector<WeightedScenario> sampled;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    sampled.push_back({scenarios[s].deltas, beta * scenarios[s].probability, "s" + std::to_string(s)});
  const double theta_weight = 1.0 - beta;

  lp::SolveOptions sub_options = options.solver;
  sub_options.mip_node_limit = options.subproblem_node_limit;
  auto worst_case = [&](const Schedule& schedule) {
    return solve_worst_case(system, schedule, set.lambda_max, set.gamma, sub_options);
  };

  auto solve_master = [&](bool with_cuts) {
    auto ef = build_extensive(system, config, sampled);
    std::optional<lp::VarId> theta;
    if (with_cuts) {
      theta = ef.program.add_variable("theta", -lp::kInfinity, lp::kInfinity);
      ef.program.add_objective(*theta, theta_weight);
      for (std::size_t j = 0; j < robust.size(); ++j) {
        const std::string prefix = "j" + std::to_string(j);
        auto block = add_balancing_block(ef.program, system, prefix, robust[j], ef.first_stage);
        lp::LinearExpr cut = block.cost.scaled(-1.0);
        cut.add(*theta, 1.0);
        ef.program.add_constraint(prefix + ".cut", cut, lp::RowSense::greater_equal, 0.0);
      }
    }
    auto result = lp::solve(ef.program, options.solver);
    if (!result.optimal()) throw CcgError(std::string("CCG master ended with status ") + lp::to_string(result.status));
    MasterSolution m;
    m.schedule = extract_schedule(system, ef.first_stage, result);
    m.objective = result.objective;
    m.theta = theta ? result.value(*theta) : 0.0;
    return m;
  };

  CcgResult out;
  auto& trace = out.trace;
  trace.tolerance = options.tolerance;
  trace.warm_started = !robust.empty();

  auto finish = [&](const MasterSolution& m) {
    out.schedule = m.schedule;
    out.objective = m.objective;
    for (const auto& d : robust) out.robust_scenarios.push_back({d, 0.0, ScenarioOrigin::robust});
    equalize(out.robust_scenarios);
    return out;
  };

  // Zero robust weight: θ drops out of the objective, nothing to generate.
  if (theta_weight == 0.0) {
    const auto start = std::chrono::steady_clock::now();
    auto m = solve_master(false);
    CcgIteration row;
    row.lower_bound = row.upper_bound = m.objective;
    row.seconds = elapsed(start);
    trace.rows.push_back(row);
    trace.converged = true;
    trace.gap = 0.0;
    out.upper_bound = m.objective;
    return finish(m);
  }

  double best_ub = std::numeric_limits<double>::infinity();
  Schedule incumbent;
  if (robust.empty()) {
    const auto start = std::chrono::steady_clock::now();
    auto m = solve_master(false);
    auto wc = worst_case(m.schedule);
    best_ub = m.objective + theta_weight * wc.bound;
    incumbent = m.schedule;
    CcgIteration row;
    row.upper_bound = best_ub;
    row.subproblem = wc.value;
    row.subproblem_bound = wc.bound;
    row.deltas = wc.deltas;
    row.seconds = elapsed(start);
    trace.rows.push_back(row);
    robust.push_back(wc.deltas);
  }

  MasterSolution last;
  for (int k = 1; k <= options.max_iterations; ++k) {
    const auto start = std::chrono::steady_clock::now();
    last = solve_master(true);
    auto wc = worst_case(last.schedule);
    const double ub = last.objective - theta_weight * last.theta + theta_weight * wc.bound;
    if (ub < best_ub) {
      best_ub = ub;
      incumbent = last.schedule;
    }
    const bool duplicate = std::find(robust.begin(), robust.end(), wc.deltas) != robust.end();

    CcgIteration row;
    row.iteration = k;
    row.lower_bound = last.objective;
    row.upper_bound = best_ub;
    row.subproblem = wc.value;
    row.subproblem_bound = wc.bound;
    row.deltas = wc.deltas;
    row.duplicate = duplicate;
    row.seconds = elapsed(start);
    trace.rows.push_back(row);
    trace.iterations = k;
    trace.gap = best_ub - last.objective;
    out.upper_bound = best_ub;

    // A repeated exact worst case proves optimality up to round-off; a
    // repeated incumbent from a stopped search only means no progress.
    if (trace.gap <= options.tolerance || duplicate) {
      trace.converged = trace.gap <= options.tolerance || wc.proven;
      trace.duplicate_stop = duplicate && trace.gap > options.tolerance;
      if (!trace.converged) last.schedule = incumbent;
      return finish(last);
    }
    robust.push_back(wc.deltas);
  }

  // Out of iterations: hand back the best incumbent, flagged.
  last.schedule = incumbent;
  return finish(last);
}

void require_convergence(const CcgTrace& trace, const CcgOptions& options) {
  if (trace.converged || options.allow_unconverged) return;
  if (trace.duplicate_stop)
    throw CcgError("CCG stalled with gap " + format_number(trace.gap) +
                   ": the node-limited subproblem repeated a scenario without proving it worst");
  throw CcgError("CCG did not converge within " + std::to_string(options.max_iterations) + " iterations (gap " +
                 format_number(trace.gap) + ")");
}

CcgResult solve_robust(const HydroSystem& system, const UncertaintySet& set, const CcgOptions& options,
                       const DayAheadConfig& config) {
  return run_ccg(system, {}, 0.0, set, options, config);
}

void write_trace_csv(const CcgTrace& trace, const std::string& path, const std::string& manifest_id) {
  CsvWriter csv(path, manifest_id);
  std::size_t T = 0;
  for (const auto& r : trace.rows) T = std::max(T, r.deltas.size());
  std::vector<std::string> header{"iteration", "lower_bound", "upper_bound", "gap", "subproblem",
                                  "subproblem_bound", "seconds", "duplicate"};
  for (std::size_t t = 0; t < T; ++t) header.push_back("t" + std::to_string(t + 1));
  csv.row(header);
  for (const auto& r : trace.rows) {
    std::vector<std::string> row{std::to_string(r.iteration), format_number(r.lower_bound),
                                 format_number(r.upper_bound), format_number(r.upper_bound - r.lower_bound),
                                 format_number(r.subproblem), format_number(r.subproblem_bound),
                                 format_number(r.seconds), r.duplicate ? "1" : "0"};
    for (std::size_t t = 0; t < T; ++t) row.push_back(t < r.deltas.size() ? format_number(r.deltas[t]) : "");
    csv.row(row);
  }
}

}  // namespace hydro
