#include "hydro/day_ahead.hpp"

#include <cmath>

namespace hydro {

using lp::RowSense;
using lp::Term;

FirstStageVars add_first_stage(lp::LinearProgram& program, const HydroSystem& system, const DayAheadConfig& config,
                               const std::string& prefix) {
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();
  const auto& topo = system.topology;

  FirstStageVars fs;
  fs.hydro = add_hydraulics(program, system, prefix);
  fs.reserve.resize(M);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t t = 0; t < T; ++t) {
      auto r = program.add_variable(var_name(prefix, "r", topo[m].id, t), 0.0, topo[m].max_production);
      fs.reserve[m].push_back(r);
      fs.reserve_total.add(r, 1.0);
    }

  for (std::size_t t = 0; t < T; ++t) {
    const std::string ts = std::to_string(t);
    std::vector<Term> balance;
    std::vector<Term> requirement;
    for (std::size_t m = 0; m < M; ++m) {
      balance.push_back({fs.hydro.production[m][t], 1.0});
      requirement.push_back({fs.reserve[m][t], 1.0});
    }
    fs.power_balance.push_back(program.add_constraint(prefix + ".power_bal[" + ts + "]", std::move(balance),
                                                      RowSense::equal, system.grid.net_load[t]));
    for (std::size_t m = 0; m < M; ++m) {
      const auto& id = topo[m].id;
      const auto p = fs.hydro.production[m][t];
      const auto r = fs.reserve[m][t];
      program.add_constraint(var_name(prefix, "prod_upper", id, t), {{p, 1.0}, {r, 1.0}}, RowSense::less_equal,
                             topo[m].max_production);
      program.add_constraint(var_name(prefix, "prod_lower", id, t), {{p, 1.0}, {r, -1.0}}, RowSense::greater_equal,
                             0.0);
    }
    const double req = config.include_reserve_req ? system.grid.reserve_req[t] : 0.0;
    fs.reserve_requirement.push_back(
        program.add_constraint(prefix + ".res_req[" + ts + "]", std::move(requirement), RowSense::greater_equal, req));
  }
  fs.cost = fs.hydro.water_cost;
  return fs;
}

void add_first_stage_objective(lp::LinearProgram& program, const HydroSystem& system, const DayAheadConfig& config,
                               const FirstStageVars& vars) {
  program.add_objective(vars.cost);
  const double eps = config.epsilon(system);
  if (eps != 0.0) program.add_objective(vars.reserve_total, eps);
}

DayAheadModel build_day_ahead(const HydroSystem& system, const DayAheadConfig& config) {
  DayAheadModel model;
  model.vars = add_first_stage(model.program, system, config);
  add_first_stage_objective(model.program, system, config, model.vars);
  return model;
}

double water_cost(const HydroSystem& system, const std::vector<std::vector<double>>& volume,
                  const std::vector<std::vector<double>>& bypass, const std::vector<std::vector<double>>& spill) {
  const std::size_t T = system.periods();
  double total = 0.0;
  for (std::size_t m = 0; m < system.modules(); ++m) {
    total -= system.topology[m].water_value * volume[m][T];
    for (std::size_t t = 0; t < T; ++t)
      total += system.grid.period_hours[t] *
               (system.costs.bypass_penalty * bypass[m][t] + system.costs.spill_penalty * spill[m][t]);
  }
  return total;
}

Schedule extract_schedule(const HydroSystem& system, const FirstStageVars& vars, const lp::SolveResult& result) {
  if (!result.optimal())
    throw std::runtime_error(std::string("cannot extract a schedule from a ") + lp::to_string(result.status) +
                             " result");
  const std::size_t M = system.modules();
  auto read = [&](const std::vector<std::vector<lp::VarId>>& ids) {
    std::vector<std::vector<double>> out(ids.size());
    for (std::size_t m = 0; m < ids.size(); ++m)
      for (auto id : ids[m]) out[m].push_back(result.value(id));
    return out;
  };

  Schedule s;
  s.production = read(vars.hydro.production);
  s.reserve = read(vars.reserve);
  s.bypass = read(vars.hydro.bypass);
  s.spill = read(vars.hydro.spill);
  s.flow_in = read(vars.hydro.flow_in);
  s.flow_out = read(vars.hydro.flow_out);
  s.volume = read(vars.hydro.volume);
  s.segment_discharge.resize(M);
  for (std::size_t m = 0; m < M; ++m) s.segment_discharge[m] = read(vars.hydro.discharge[m]);
  s.first_stage_cost = water_cost(system, s.volume, s.bypass, s.spill);
  s.system_fingerprint = system.fingerprint();
  return s;
}

Schedule solve_day_ahead(const HydroSystem& system, const DayAheadConfig& config, const lp::SolveOptions& options) {
  auto model = build_day_ahead(system, config);
  auto result = lp::solve(model.program, options);
  if (result.status == lp::SolveStatus::infeasible) {
    // Locate the failing group: drop the reserve requirement and retry.
    std::string group = "power_balance";
    if (config.include_reserve_req) {
      DayAheadConfig relaxed = config;
      relaxed.include_reserve_req = false;
      auto retry = build_day_ahead(system, relaxed);
      if (lp::solve(retry.program, options).optimal()) group = "reserve_requirement";
    }
    throw InfeasibleError(group, "day-ahead problem infeasible; failing constraint group: " + group);
  }
  if (!result.optimal())
    throw lp::SolverError(std::string("day-ahead solve ended with status ") + lp::to_string(result.status));
  return extract_schedule(system, model.vars, result);
}

double day_ahead_cost(const HydroSystem& system, const Schedule& schedule) {
  if (auto issues = check_schedule(system, schedule); !issues.empty())
    throw InvalidScheduleError("schedule violates its invariants: " + issues.front());
  return water_cost(system, schedule.volume, schedule.bypass, schedule.spill);
}

}  // namespace hydro
