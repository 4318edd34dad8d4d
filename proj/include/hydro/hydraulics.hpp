#pragma once

#include <string>
#include <vector>

#include "hydro/lp.hpp"
#include "hydro/system.hpp"

namespace hydro {

/// Variables of one copy of the cascade hydraulics (routing, mass balance,
/// turbine curve). Shared by the day-ahead stage and every balancing block.
struct HydraulicVars {
  std::vector<std::vector<std::vector<lp::VarId>>> discharge;  // [m][n][t]
  std::vector<std::vector<lp::VarId>> bypass;                   // [m][t]
  std::vector<std::vector<lp::VarId>> spill;
  std::vector<std::vector<lp::VarId>> flow_in;
  std::vector<std::vector<lp::VarId>> flow_out;
  std::vector<std::vector<lp::VarId>> volume;      // [m][0..T]
  std::vector<std::vector<lp::VarId>> production;  // [m][t]

  /// -sum WV v_end + sum F (Cb qb + Co qo)
  lp::LinearExpr water_cost;
};

/// Adds variables and constraints for one hydraulic copy; names are
/// prefixed with `prefix` (e.g. "da", "s17"). Capacities are variable
/// bounds; routing, initial volume, mass balance and turbine curve are rows.
/// Does not touch the objective.
HydraulicVars add_hydraulics(lp::LinearProgram& program, const HydroSystem& system, const std::string& prefix);

/// Variable name helper: prefix.kind[module,t] or prefix.kind[module,n,t].
std::string var_name(const std::string& prefix, const char* kind, const std::string& module, std::size_t t);
std::string var_name(const std::string& prefix, const char* kind, const std::string& module, std::size_t n,
                     std::size_t t);

}  // namespace hydro
