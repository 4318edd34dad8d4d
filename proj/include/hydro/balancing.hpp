#pragma once

#include <span>
#include <string>
#include <vector>

#include "hydro/day_ahead.hpp"
#include "hydro/hydraulics.hpp"
#include "hydro/lp.hpp"
#include "hydro/system.hpp"

namespace hydro {

/// Variables of one balancing-stage copy.
struct BalancingVars {
  HydraulicVars hydro;
  std::vector<lp::VarId> shed;         // s+ [t]
  std::vector<lp::VarId> power_spill;  // s- [t]
  std::vector<lp::RowId> power_balance;
  std::vector<std::vector<lp::RowId>> upper_link;  // [m][t], empty for perfect foresight
  std::vector<std::vector<lp::RowId>> lower_link;
  lp::LinearExpr cost;  // Z^bal
};

/// Balancing block whose production band is p_mt ± r_mt of a fixed schedule.
BalancingVars add_balancing_block(lp::LinearProgram& program, const HydroSystem& system, const std::string& prefix,
                                  std::span<const double> deltas, const Schedule& schedule);

/// Balancing block linked to first-stage variables of the same program.
BalancingVars add_balancing_block(lp::LinearProgram& program, const HydroSystem& system, const std::string& prefix,
                                  std::span<const double> deltas, const FirstStageVars& first_stage);

/// Balancing block with the production band relaxed to [0, P_m].
BalancingVars add_perfect_foresight_block(lp::LinearProgram& program, const HydroSystem& system,
                                          const std::string& prefix, std::span<const double> deltas);

struct BalancingModel {
  lp::LinearProgram program;
  BalancingVars vars;
};

BalancingModel build_balancing_primal(const HydroSystem& system, const Schedule& schedule,
                                      std::span<const double> deltas);
BalancingModel build_perfect_foresight(const HydroSystem& system, std::span<const double> deltas);

struct BalancingOutcome {
  std::vector<std::vector<double>> production;  // p̄ [m][t]
  std::vector<std::vector<double>> discharge;   // total turbine flow [m][t]
  std::vector<std::vector<double>> bypass;
  std::vector<std::vector<double>> spill;
  std::vector<std::vector<double>> volume;  // [m][0..T]
  std::vector<double> shed;                 // s+
  std::vector<double> power_spill;          // s-
  double objective = 0.0;                   // Z^bal
};

BalancingOutcome extract_outcome(const HydroSystem& system, const BalancingVars& vars, const lp::SolveResult& result);

/// Primal balancing solve for a fixed first stage (complete recourse: always
/// optimal for a valid schedule).
BalancingOutcome solve_balancing(const HydroSystem& system, const Schedule& schedule, std::span<const double> deltas,
                                 const lp::SolveOptions& options = {});
BalancingOutcome solve_perfect_foresight(const HydroSystem& system, std::span<const double> deltas,
                                         const lp::SolveOptions& options = {});

/// Band, power balance and mass balance violations of an outcome.
std::vector<std::string> check_outcome(const HydroSystem& system, const Schedule* schedule,
                                       std::span<const double> deltas, const BalancingOutcome& outcome,
                                       ScheduleTolerance tolerance = {});

/// max over the budgeted set of min Z^bal, as one maximization MILP over
/// the duals of the balancing LP and the deviation pattern u±. The bilinear
/// term Λ(u+ - u-)λ is replaced by w± = u±λ, exact because dual feasibility
/// of s± confines λ to [-C⁻, C⁺].
struct WorstCaseModel {
  lp::LinearProgram program;
  std::vector<lp::VarId> up;      // u+ [t]
  std::vector<lp::VarId> down;    // u- [t]
  std::vector<lp::VarId> lambda;  // dual of the power balance [t]
  std::vector<lp::VarId> w_up;
  std::vector<lp::VarId> w_down;
  double lambda_max = 0.0;
  int gamma = 0;
};

WorstCaseModel build_worst_case_milp(const HydroSystem& system, const Schedule& schedule, double lambda_max,
                                     int gamma);

/// Pins u± to the pattern of `deltas` (each entry must be 0 or ±Λ).
void fix_deviation(WorstCaseModel& model, std::span<const double> deltas);

struct WorstCase {
  std::vector<double> deltas;
  std::vector<int> up;
  std::vector<int> down;
  double value = 0.0;  // W^bal at deltas
  double bound = 0.0;  // proven upper bound on the maximum
  bool proven = true;  // false when a node limit stopped the search
  double seconds = 0.0;
};

WorstCase solve_worst_case(const HydroSystem& system, const Schedule& schedule, double lambda_max, int gamma,
                           const lp::SolveOptions& options = {});
/// Under a node limit the incumbent, or Δ = 0 when there is none, is
/// returned with proven = false.
WorstCase solve_worst_case(const WorstCaseModel& model, const lp::SolveOptions& options = {});

}  // namespace hydro
