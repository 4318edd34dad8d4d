#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hydro/balancing.hpp"
#include "hydro/ccg.hpp"
#include "hydro/day_ahead.hpp"
#include "hydro/lp.hpp"
#include "hydro/system.hpp"
#include "hydro/uncertainty.hpp"

namespace hydro {

/// One balancing block of an extensive form, weighted in the objective.
struct WeightedScenario {
  std::vector<double> deltas;
  double weight = 0.0;
  std::string prefix;  // variable namespace, e.g. "s3" or "j0"
};

/// First stage plus balancing blocks coupled through (p, r). The objective
/// is Z^da + ε Σr + Σ weight_k Z^bal_k.
struct ExtensiveForm {
  lp::LinearProgram program;
  FirstStageVars first_stage;
  std::vector<BalancingVars> blocks;
};

ExtensiveForm build_extensive(const HydroSystem& system, const DayAheadConfig& config,
                              const std::vector<WeightedScenario>& scenarios);

struct ExtensiveSolution {
  Schedule schedule;
  std::vector<BalancingOutcome> outcomes;  // same order as the scenarios
  std::vector<double> weights;
  double objective = 0.0;  // solver objective, tie-breaker included
  double reserve_term = 0.0;  // ε Σr part of the objective
};

ExtensiveSolution solve_extensive(const HydroSystem& system, const DayAheadConfig& config,
                                  const std::vector<WeightedScenario>& scenarios,
                                  const lp::SolveOptions& options = {});

/// Two-stage stochastic model over S (probabilities must sum to 1).
ExtensiveSolution solve_stochastic(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                                   const DayAheadConfig& config = default_two_stage_config(),
                                   const lp::SolveOptions& options = {});

/// Mixed model: weights βπ_s on S and (1-β)/|J| on J.
ExtensiveSolution solve_mixed(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                              const std::vector<NetLoadScenario>& robust, double beta,
                              const DayAheadConfig& config = default_two_stage_config(),
                              const lp::SolveOptions& options = {});

/// Unified model: stochastic blocks weighted βπ_s plus (1-β)θ with robust
/// cuts generated by CCG over the budgeted set.
CcgResult solve_unified(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                        const UncertaintySet& set, double beta, const CcgOptions& options = {},
                        const DayAheadConfig& config = default_two_stage_config());

/// β Σπ_s Z_s + (1-β) Σπ_j Z_j + Z^da recomputed from the returned blocks.
double recompute_objective(const HydroSystem& system, const ExtensiveSolution& solution);

enum class ModelKind { deterministic, stochastic, robust, unified, mixed };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);  // det|stoch|robust|unified|mixed, long names too

struct ModelSpec {
  ModelKind kind = ModelKind::deterministic;
  std::optional<double> beta;
  std::vector<NetLoadScenario> scenarios;         // S
  std::vector<NetLoadScenario> robust_scenarios;  // J for mixed; empty means run CCG first
  UncertaintySet set;                             // L for robust/unified (and mixed without J)
  /// Reserve requirement. Unset: R_t of the grid for deterministic, 0 otherwise.
  std::optional<std::vector<double>> reserve_req;
  CcgOptions ccg;
  lp::SolveOptions solver;
};

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Kind-specific field checks; throws SpecError.
void validate_spec(const ModelSpec& spec, std::size_t periods);

struct ModelSolution {
  ModelKind kind = ModelKind::deterministic;
  Schedule schedule;
  double objective = 0.0;
  std::optional<CcgTrace> trace;                  // robust, unified and mixed-with-CCG
  std::vector<NetLoadScenario> robust_scenarios;  // J produced or used
  bool ccg_invoked = false;
};

ModelSolution solve_model(const HydroSystem& system, const ModelSpec& spec);

/// Grid with R_t replaced.
HydroSystem with_reserve_requirement(const HydroSystem& system, const std::vector<double>& reserve_req);

}  // namespace hydro
