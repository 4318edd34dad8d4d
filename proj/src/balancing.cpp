#include "hydro/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hydro {

using lp::RowSense;
using lp::Term;
using lp::VarId;

namespace {

void require_length(const HydroSystem& system, std::span<const double> deltas) {
  if (deltas.size() != system.periods())
    throw std::invalid_argument("deviation vector has " + std::to_string(deltas.size()) + " entries, expected " +
                                std::to_string(system.periods()));
}

// Hydraulics, slacks and the perturbed power balance; the production band
// is added by the caller.
BalancingVars add_core(lp::LinearProgram& program, const HydroSystem& system, const std::string& prefix,
                       std::span<const double> deltas) {
  require_length(system, deltas);
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();

  BalancingVars b;
  b.hydro = add_hydraulics(program, system, prefix);
  b.cost = b.hydro.water_cost;
  for (std::size_t t = 0; t < T; ++t) {
    const std::string ts = std::to_string(t);
    auto up = program.add_variable(prefix + ".shed[" + ts + "]");
    auto down = program.add_variable(prefix + ".pspill[" + ts + "]");
    b.shed.push_back(up);
    b.power_spill.push_back(down);
    std::vector<Term> balance{{up, 1.0}, {down, -1.0}};
    for (std::size_t m = 0; m < M; ++m) balance.push_back({b.hydro.production[m][t], 1.0});
    b.power_balance.push_back(program.add_constraint(prefix + ".power_bal[" + ts + "]", std::move(balance),
                                                     RowSense::equal, system.grid.net_load[t] + deltas[t]));
    if (system.costs.load_shed != 0.0) b.cost.add(up, system.costs.load_shed);
    if (system.costs.power_spill != 0.0) b.cost.add(down, system.costs.power_spill);
  }
  return b;
}

std::vector<std::vector<double>> read(const lp::SolveResult& result, const std::vector<std::vector<VarId>>& ids) {
  std::vector<std::vector<double>> out(ids.size());
  for (std::size_t m = 0; m < ids.size(); ++m)
    for (auto id : ids[m]) out[m].push_back(result.value(id));
  return out;
}

}  // namespace

BalancingVars add_balancing_block(lp::LinearProgram& program, const HydroSystem& system, const std::string& prefix,
                                  std::span<const double> deltas, const Schedule& schedule) {
  auto b = add_core(program, system, prefix, deltas);
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();
  b.upper_link.resize(M);
  b.lower_link.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& id = system.topology[m].id;
    for (std::size_t t = 0; t < T; ++t) {
      const auto p = b.hydro.production[m][t];
      const double sched = schedule.production[m][t];
      const double res = schedule.reserve[m][t];
      b.upper_link[m].push_back(
          program.add_constraint(var_name(prefix, "band_up", id, t), {{p, 1.0}}, RowSense::less_equal, sched + res));
      b.lower_link[m].push_back(program.add_constraint(var_name(prefix, "band_lo", id, t), {{p, 1.0}},
                                                       RowSense::greater_equal, sched - res));
    }
  }
  return b;
}

BalancingVars add_balancing_block(lp::LinearProgram& program, const HydroSystem& system, const std::string& prefix,
                                  std::span<const double> deltas, const FirstStageVars& first_stage) {
  auto b = add_core(program, system, prefix, deltas);
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();
  b.upper_link.resize(M);
  b.lower_link.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& id = system.topology[m].id;
    for (std::size_t t = 0; t < T; ++t) {
      const auto pbar = b.hydro.production[m][t];
      const auto p = first_stage.hydro.production[m][t];
      const auto r = first_stage.reserve[m][t];
      b.upper_link[m].push_back(program.add_constraint(var_name(prefix, "band_up", id, t),
                                                       {{pbar, 1.0}, {p, -1.0}, {r, -1.0}}, RowSense::less_equal, 0.0));
      b.lower_link[m].push_back(program.add_constraint(
          var_name(prefix, "band_lo", id, t), {{pbar, 1.0}, {p, -1.0}, {r, 1.0}}, RowSense::greater_equal, 0.0));
    }
  }
  return b;
}

BalancingVars add_perfect_foresight_block(lp::LinearProgram& program, const HydroSystem& system,
                                          const std::string& prefix, std::span<const double> deltas) {
  // Production is already bounded by [0, P_m] in the hydraulics.
  return add_core(program, system, prefix, deltas);
}

BalancingModel build_balancing_primal(const HydroSystem& system, const Schedule& schedule,
                                      std::span<const double> deltas) {
  BalancingModel model;
  model.vars = add_balancing_block(model.program, system, "bal", deltas, schedule);
  model.program.add_objective(model.vars.cost);
  return model;
}

BalancingModel build_perfect_foresight(const HydroSystem& system, std::span<const double> deltas) {
  BalancingModel model;
  model.vars = add_perfect_foresight_block(model.program, system, "pf", deltas);
  model.program.add_objective(model.vars.cost);
  return model;
}

BalancingOutcome extract_outcome(const HydroSystem& system, const BalancingVars& vars, const lp::SolveResult& result) {
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();
  BalancingOutcome out;
  out.production = read(result, vars.hydro.production);
  out.bypass = read(result, vars.hydro.bypass);
  out.spill = read(result, vars.hydro.spill);
  out.volume = read(result, vars.hydro.volume);
  out.discharge.assign(M, std::vector<double>(T, 0.0));
  for (std::size_t m = 0; m < M; ++m)
    for (const auto& segment : vars.hydro.discharge[m])
      for (std::size_t t = 0; t < T; ++t) out.discharge[m][t] += result.value(segment[t]);
  for (std::size_t t = 0; t < T; ++t) {
    out.shed.push_back(result.value(vars.shed[t]));
    out.power_spill.push_back(result.value(vars.power_spill[t]));
  }
  out.objective = result.value(vars.cost);
  return out;
}

namespace {

BalancingOutcome solve_model(const HydroSystem& system, const BalancingModel& model, const lp::SolveOptions& options,
                             const char* what) {
  auto result = lp::solve(model.program, options);
  if (!result.optimal())
    throw lp::SolverError(std::string(what) + " solve ended with status " + lp::to_string(result.status));
  return extract_outcome(system, model.vars, result);
}

}  // namespace

BalancingOutcome solve_balancing(const HydroSystem& system, const Schedule& schedule, std::span<const double> deltas,
                                 const lp::SolveOptions& options) {
  return solve_model(system, build_balancing_primal(system, schedule, deltas), options, "balancing");
}

BalancingOutcome solve_perfect_foresight(const HydroSystem& system, std::span<const double> deltas,
                                         const lp::SolveOptions& options) {
  return solve_model(system, build_perfect_foresight(system, deltas), options, "perfect-foresight");
}

std::vector<std::string> check_outcome(const HydroSystem& system, const Schedule* schedule,
                                       std::span<const double> deltas, const BalancingOutcome& outcome,
                                       ScheduleTolerance tol) {
  std::vector<std::string> issues;
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();
  const auto& topo = system.topology;
  auto fail = [&](std::string msg) { issues.push_back(std::move(msg)); };

  for (std::size_t t = 0; t < T; ++t) {
    double supply = outcome.shed[t] - outcome.power_spill[t];
    for (std::size_t m = 0; m < M; ++m) supply += outcome.production[m][t];
    const double demand = system.grid.net_load[t] + deltas[t];
    if (std::abs(supply - demand) > tol.power)
      fail("power balance off by " + std::to_string(supply - demand) + " MW in period " + std::to_string(t));
    if (outcome.shed[t] < -tol.power || outcome.power_spill[t] < -tol.power)
      fail("negative slack in period " + std::to_string(t));
  }

  for (std::size_t m = 0; m < M; ++m) {
    const auto& mod = topo[m];
    if (std::abs(outcome.volume[m][0] - mod.initial_volume) > tol.water)
      fail(mod.id + ": initial volume differs from V0");
    for (std::size_t t = 0; t < T; ++t) {
      const double p = outcome.production[m][t];
      if (p < -tol.power || p > mod.max_production + tol.power)
        fail(mod.id + ": production outside [0, P] in period " + std::to_string(t));
      if (schedule) {
        const double lo = schedule->production[m][t] - schedule->reserve[m][t];
        const double hi = schedule->production[m][t] + schedule->reserve[m][t];
        if (p < lo - tol.power || p > hi + tol.power)
          fail(mod.id + ": production outside p +- r in period " + std::to_string(t));
      }
      double inflow = mod.inflow[t];
      for (auto i : topo.discharge_from(m)) inflow += outcome.discharge[i][t];
      for (auto i : topo.bypass_from(m)) inflow += outcome.bypass[i][t];
      for (auto i : topo.spill_from(m)) inflow += outcome.spill[i][t];
      const double outflow = outcome.discharge[m][t] + outcome.bypass[m][t] + outcome.spill[m][t];
      const double expected = outcome.volume[m][t] + flow_to_volume(inflow - outflow, system.grid.period_hours[t]);
      if (std::abs(outcome.volume[m][t + 1] - expected) > tol.water)
        fail(mod.id + ": water balance residual " + std::to_string(outcome.volume[m][t + 1] - expected) +
             " in period " + std::to_string(t));
    }
    for (std::size_t t = 0; t <= T; ++t)
      if (outcome.volume[m][t] < -tol.water || outcome.volume[m][t] > mod.max_volume + tol.water)
        fail(mod.id + ": volume outside [0, V] at index " + std::to_string(t));
  }
  return issues;
}

WorstCaseModel build_worst_case_milp(const HydroSystem& system, const Schedule& schedule, double lambda_max,
                                     int gamma) {
  const std::size_t T = system.periods();
  if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be positive");
  if (gamma < 0 || static_cast<std::size_t>(gamma) > 2 * T)
    throw std::invalid_argument("gamma must lie in [0, 2T]");

  const std::vector<double> zero(T, 0.0);
  auto primal = build_balancing_primal(system, schedule, zero);
  auto dual = lp::dualize(primal.program);

  WorstCaseModel wc;
  wc.lambda_max = lambda_max;
  wc.gamma = gamma;
  wc.program = std::move(dual.program);
  auto& prog = wc.program;
  const double c_up = system.costs.load_shed;
  const double c_down = system.costs.power_spill;

  std::vector<Term> budget;
  for (std::size_t t = 0; t < T; ++t) {
    const std::string ts = std::to_string(t);
    const auto lambda = dual.row_dual[primal.vars.power_balance[t].index];
    // Implied by the dual rows of s+ and s-; stated explicitly so the
    // McCormick envelope below has finite bounds to work with.
    prog.set_bounds(lambda, -c_down, c_up);
    wc.lambda.push_back(lambda);

    auto up = prog.add_variable("u_up[" + ts + "]", 0.0, 1.0, lp::VarType::binary);
    auto down = prog.add_variable("u_down[" + ts + "]", 0.0, 1.0, lp::VarType::binary);
    auto w_up = prog.add_variable("w_up[" + ts + "]", -c_down, c_up);
    auto w_down = prog.add_variable("w_down[" + ts + "]", -c_down, c_up);
    wc.up.push_back(up);
    wc.down.push_back(down);
    wc.w_up.push_back(w_up);
    wc.w_down.push_back(w_down);

    prog.add_constraint("one_sign[" + ts + "]", {{up, 1.0}, {down, 1.0}}, RowSense::less_equal, 1.0);
    budget.push_back({up, 1.0});
    budget.push_back({down, 1.0});

    for (auto [w, u, tag] : {std::tuple{w_up, up, "up"}, std::tuple{w_down, down, "down"}}) {
      const std::string sfx = std::string("_") + tag + "[" + ts + "]";
      // w = u * lambda for binary u and lambda in [-C-, C+].
      prog.add_constraint("mc1" + sfx, {{w, 1.0}, {u, -c_up}}, RowSense::less_equal, 0.0);
      prog.add_constraint("mc2" + sfx, {{w, 1.0}, {u, c_down}}, RowSense::greater_equal, 0.0);
      prog.add_constraint("mc3" + sfx, {{w, 1.0}, {lambda, -1.0}, {u, c_down}}, RowSense::less_equal, c_down);
      prog.add_constraint("mc4" + sfx, {{w, 1.0}, {lambda, -1.0}, {u, -c_up}}, RowSense::greater_equal, -c_up);
    }
    prog.add_objective(w_up, lambda_max);
    prog.add_objective(w_down, -lambda_max);
  }
  prog.add_constraint("budget", std::move(budget), RowSense::less_equal, static_cast<double>(gamma));
  return wc;
}

void fix_deviation(WorstCaseModel& model, std::span<const double> deltas) {
  if (deltas.size() != model.up.size()) throw std::invalid_argument("deviation vector has the wrong length");
  for (std::size_t t = 0; t < deltas.size(); ++t) {
    const double d = deltas[t];
    double up = 0.0, down = 0.0;
    if (d == model.lambda_max)
      up = 1.0;
    else if (d == -model.lambda_max)
      down = 1.0;
    else if (d != 0.0)
      throw std::invalid_argument("deviation " + std::to_string(d) + " is not a vertex of the uncertainty set");
    model.program.set_bounds(model.up[t], up, up);
    model.program.set_bounds(model.down[t], down, down);
  }
}

WorstCase solve_worst_case(const WorstCaseModel& model, const lp::SolveOptions& options) {
  auto result = lp::solve(model.program, options);
  if (result.status == lp::SolveStatus::unbounded)
    throw lp::SolverError("worst-case dual is unbounded; the balancing primal is infeasible");
  const bool stopped = result.status == lp::SolveStatus::limit;
  if (!result.optimal() && !stopped)
    throw lp::SolverError(std::string("worst-case MILP ended with status ") + lp::to_string(result.status));
  const double bound = result.objective_bound;
  if (stopped && !result.has_incumbent()) {
    // Δ = 0 is always in the set, so it stands in for the missing incumbent.
    auto zero = model;
    fix_deviation(zero, std::vector<double>(model.up.size(), 0.0));
    auto unlimited = options;
    unlimited.mip_node_limit = -1;  // every binary is fixed
    result = lp::solve(zero.program, unlimited);
    if (!result.optimal())
      throw lp::SolverError(std::string("worst-case MILP at zero deviation ended with status ") +
                            lp::to_string(result.status));
  }
  WorstCase wc;
  wc.value = result.objective;
  wc.bound = stopped ? std::max(bound, result.objective) : result.objective;
  wc.proven = !stopped;
  wc.seconds = result.seconds;
  for (std::size_t t = 0; t < model.up.size(); ++t) {
    const int u = std::lround(result.value(model.up[t]));
    const int d = std::lround(result.value(model.down[t]));
    wc.up.push_back(u);
    wc.down.push_back(d);
    wc.deltas.push_back(model.lambda_max * (u - d));
  }
  return wc;
}

WorstCase solve_worst_case(const HydroSystem& system, const Schedule& schedule, double lambda_max, int gamma,
                           const lp::SolveOptions& options) {
  return solve_worst_case(build_worst_case_milp(system, schedule, lambda_max, gamma), options);
}

}  // namespace hydro
