#include "hydro/hydraulics.hpp"

namespace hydro {

using lp::RowSense;
using lp::Term;
using lp::VarId;

std::string var_name(const std::string& prefix, const char* kind, const std::string& module, std::size_t t) {
  return prefix + "." + kind + "[" + module + "," + std::to_string(t) + "]";
}

std::string var_name(const std::string& prefix, const char* kind, const std::string& module, std::size_t n,
                     std::size_t t) {
  return prefix + "." + kind + "[" + module + "," + std::to_string(n) + "," + std::to_string(t) + "]";
}

HydraulicVars add_hydraulics(lp::LinearProgram& program, const HydroSystem& system, const std::string& prefix) {
  const auto& topo = system.topology;
  const auto& grid = system.grid;
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();

  HydraulicVars h;
  h.discharge.resize(M);
  h.bypass.resize(M);
  h.spill.resize(M);
  h.flow_in.resize(M);
  h.flow_out.resize(M);
  h.volume.resize(M);
  h.production.resize(M);

  for (std::size_t m = 0; m < M; ++m) {
    const auto& mod = topo[m];
    const auto& id = mod.id;
    h.discharge[m].resize(mod.segments.size());
    for (std::size_t n = 0; n < mod.segments.size(); ++n)
      for (std::size_t t = 0; t < T; ++t)
        h.discharge[m][n].push_back(
            program.add_variable(var_name(prefix, "qd", id, n, t), 0.0, mod.segments[n].max_discharge));
    for (std::size_t t = 0; t < T; ++t) {
      h.bypass[m].push_back(program.add_variable(var_name(prefix, "qb", id, t), 0.0, mod.max_bypass));
      h.spill[m].push_back(program.add_variable(var_name(prefix, "qo", id, t), 0.0, mod.max_spill));
      h.flow_in[m].push_back(program.add_variable(var_name(prefix, "qin", id, t)));
      h.flow_out[m].push_back(program.add_variable(var_name(prefix, "qout", id, t)));
      h.production[m].push_back(program.add_variable(var_name(prefix, "p", id, t), 0.0, mod.max_production));
    }
    for (std::size_t t = 0; t <= T; ++t)
      h.volume[m].push_back(program.add_variable(var_name(prefix, "v", id, t), 0.0, mod.max_volume));
  }

  for (std::size_t m = 0; m < M; ++m) {
    const auto& mod = topo[m];
    const auto& id = mod.id;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<Term> in{{h.flow_in[m][t], -1.0}};
      for (auto i : topo.discharge_from(m))
        for (std::size_t n = 0; n < topo[i].segments.size(); ++n) in.push_back({h.discharge[i][n][t], 1.0});
      for (auto i : topo.bypass_from(m)) in.push_back({h.bypass[i][t], 1.0});
      for (auto i : topo.spill_from(m)) in.push_back({h.spill[i][t], 1.0});
      program.add_constraint(var_name(prefix, "water_in", id, t), std::move(in), RowSense::equal, 0.0);

      std::vector<Term> out{{h.flow_out[m][t], -1.0}, {h.bypass[m][t], 1.0}, {h.spill[m][t], 1.0}};
      for (std::size_t n = 0; n < mod.segments.size(); ++n) out.push_back({h.discharge[m][n][t], 1.0});
      program.add_constraint(var_name(prefix, "water_out", id, t), std::move(out), RowSense::equal, 0.0);
    }

    program.add_constraint(prefix + ".init_vol[" + id + "]", {{h.volume[m][0], 1.0}}, RowSense::equal,
                           mod.initial_volume);

    for (std::size_t t = 0; t < T; ++t) {
      const double k = flow_to_volume(1.0, grid.period_hours[t]);
      program.add_constraint(var_name(prefix, "hydro_bal", id, t),
                             {{h.volume[m][t + 1], 1.0},
                              {h.volume[m][t], -1.0},
                              {h.flow_in[m][t], -k},
                              {h.flow_out[m][t], k}},
                             RowSense::equal, k * mod.inflow[t]);

      std::vector<Term> prod{{h.production[m][t], -1.0}};
      for (std::size_t n = 0; n < mod.segments.size(); ++n)
        prod.push_back({h.discharge[m][n][t], mod.segments[n].energy_coeff});
      program.add_constraint(var_name(prefix, "hydro_prod", id, t), std::move(prod), RowSense::equal, 0.0);
    }

    h.water_cost.add(h.volume[m][T], -mod.water_value);
    for (std::size_t t = 0; t < T; ++t) {
      const double hours = grid.period_hours[t];
      if (system.costs.bypass_penalty != 0.0) h.water_cost.add(h.bypass[m][t], hours * system.costs.bypass_penalty);
      if (system.costs.spill_penalty != 0.0) h.water_cost.add(h.spill[m][t], hours * system.costs.spill_penalty);
    }
  }
  return h;
}

}  // namespace hydro
