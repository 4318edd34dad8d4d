#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hydro/hydraulics.hpp"
#include "hydro/lp.hpp"
#include "hydro/system.hpp"

namespace hydro {

struct DayAheadConfig {
  /// Enforce sum_m r_mt >= R_t with the grid's R_t; otherwise the
  /// requirement row is kept with rhs 0.
  bool include_reserve_req = true;
  /// Overrides costs.reserve_epsilon when set.
  std::optional<double> reserve_epsilon;

  double epsilon(const HydroSystem& system) const {
    return reserve_epsilon.value_or(system.costs.reserve_epsilon);
  }
};

/// First-stage variables: hydraulics plus symmetric reserves.
struct FirstStageVars {
  HydraulicVars hydro;
  std::vector<std::vector<lp::VarId>> reserve;  // [m][t]
  std::vector<lp::RowId> power_balance;         // [t]
  std::vector<lp::RowId> reserve_requirement;   // [t]
  lp::LinearExpr cost;                          // Z^da
  lp::LinearExpr reserve_total;                 // sum r, for the tie-breaker term
};

/// Adds the first stage to `program` without touching the objective.
FirstStageVars add_first_stage(lp::LinearProgram& program, const HydroSystem& system, const DayAheadConfig& config,
                               const std::string& prefix = "da");

/// Adds Z^da + epsilon * sum r to the objective.
void add_first_stage_objective(lp::LinearProgram& program, const HydroSystem& system, const DayAheadConfig& config,
                               const FirstStageVars& vars);

struct DayAheadModel {
  lp::LinearProgram program;
  FirstStageVars vars;
};

DayAheadModel build_day_ahead(const HydroSystem& system, const DayAheadConfig& config = {});

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string group, const std::string& detail)
      : std::runtime_error(detail), group_(std::move(group)) {}
  const std::string& group() const { return group_; }

 private:
  std::string group_;
};

/// Reads the first stage out of an optimal result. first_stage_cost is
/// recomputed from the extracted values and excludes the tie-breaker.
Schedule extract_schedule(const HydroSystem& system, const FirstStageVars& vars, const lp::SolveResult& result);

/// Builds, solves and extracts. Infeasibility is reported with the
/// constraint group that causes it ("reserve_requirement" or "power_balance").
Schedule solve_day_ahead(const HydroSystem& system, const DayAheadConfig& config = {},
                         const lp::SolveOptions& options = {});

class InvalidScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Z^da recomputed from schedule fields. Rejects schedules that violate
/// their invariants.
double day_ahead_cost(const HydroSystem& system, const Schedule& schedule);

/// -sum WV v_end + sum F (Cb qb + Co qo) of raw quantities, no validation.
/// `volume` is [m][0..T].
double water_cost(const HydroSystem& system, const std::vector<std::vector<double>>& volume,
                  const std::vector<std::vector<double>>& bypass, const std::vector<std::vector<double>>& spill);

}  // namespace hydro
