#pragma once

#include <limits>
#include <string>
#include <vector>

#include "hydro/day_ahead.hpp"
#include "hydro/lp.hpp"
#include "hydro/system.hpp"
#include "hydro/uncertainty.hpp"

namespace hydro {

/// Two-stage models leave the reserve requirement to the balancing stage.
inline DayAheadConfig default_two_stage_config() {
  DayAheadConfig c;
  c.include_reserve_req = false;
  return c;
}

struct CcgOptions {
  double tolerance = 1.0;  // absolute gap, mu
  int max_iterations = 100;
  std::vector<std::vector<double>> warm_start;  // J0, each must lie in the set
  lp::SolveOptions solver;
  /// Branch-and-bound node limit of the worst-case MILP (negative: none).
  /// A stopped search still yields a valid scenario and a proven bound, so
  /// the reported gap stays honest; convergence may then be out of reach.
  std::int64_t subproblem_node_limit = -1;
  /// Let solve_model return a schedule whose CCG did not close the gap.
  bool allow_unconverged = false;
};

struct CcgIteration {
  int iteration = 0;  // 0 is the cut-free initial master
  double lower_bound = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();  // best so far
  double subproblem = 0.0;        // W^bal(x_k) at the chosen deviation
  double subproblem_bound = 0.0;  // proven upper bound on max W^bal(x_k)
  std::vector<double> deltas;
  double seconds = 0.0;
  bool duplicate = false;
};

struct CcgTrace {
  std::vector<CcgIteration> rows;
  int iterations = 0;  // master solves containing cuts
  bool converged = false;
  bool duplicate_stop = false;
  double gap = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool warm_started = false;
};

struct CcgResult {
  Schedule schedule;
  std::vector<NetLoadScenario> robust_scenarios;  // J, equiprobable, origin robust
  CcgTrace trace;
  double objective = 0.0;  // final master objective (tie-breaker included)
  double upper_bound = 0.0;
};

class CcgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stochastic blocks (weight β π_s) plus (1-β) θ with θ >= Z^bal(y_j) for
/// every generated j. An empty S with β = 0 is the pure robust problem.
CcgResult run_ccg(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios, double beta,
                  const UncertaintySet& set, const CcgOptions& options, const DayAheadConfig& config);

/// Throws CcgError for an open gap unless options.allow_unconverged.
void require_convergence(const CcgTrace& trace, const CcgOptions& options);

/// min over x of Z^da(x) + max over L of min Z^bal.
CcgResult solve_robust(const HydroSystem& system, const UncertaintySet& set, const CcgOptions& options = {},
                       const DayAheadConfig& config = default_two_stage_config());

/// iteration,lower_bound,upper_bound,gap,subproblem,subproblem_bound,seconds,duplicate,t1..tT
void write_trace_csv(const CcgTrace& trace, const std::string& path, const std::string& manifest_id = {});

}  // namespace hydro
