#include "hydro/composite.hpp"

#include <cmath>

namespace hydro {

ExtensiveForm build_extensive(const HydroSystem& system, const DayAheadConfig& config,
                              const std::vector<WeightedScenario>& scenarios) {
  ExtensiveForm ef;
  ef.first_stage = add_first_stage(ef.program, system, config);
  add_first_stage_objective(ef.program, system, config, ef.first_stage);
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto& sc = scenarios[k];
    if (sc.weight < 0.0) throw std::invalid_argument("scenario weights must be nonnegative");
    const std::string prefix = sc.prefix.empty() ? "s" + std::to_string(k) : sc.prefix;
    auto block = add_balancing_block(ef.program, system, prefix, sc.deltas, ef.first_stage);
    ef.program.add_objective(block.cost, sc.weight);
    ef.blocks.push_back(std::move(block));
  }
  return ef;
}

ExtensiveSolution solve_extensive(const HydroSystem& system, const DayAheadConfig& config,
                                  const std::vector<WeightedScenario>& scenarios, const lp::SolveOptions& options) {
  auto ef = build_extensive(system, config, scenarios);
  auto result = lp::solve(ef.program, options);
  if (!result.optimal())
    throw lp::SolverError(std::string("extensive form ended with status ") + lp::to_string(result.status));
  ExtensiveSolution sol;
  sol.schedule = extract_schedule(system, ef.first_stage, result);
  for (std::size_t k = 0; k < ef.blocks.size(); ++k) {
    sol.outcomes.push_back(extract_outcome(system, ef.blocks[k], result));
    sol.weights.push_back(scenarios[k].weight);
  }
  sol.objective = result.objective;
  sol.reserve_term = config.epsilon(system) * result.value(ef.first_stage.reserve_total);
  return sol;
}

namespace {

void check_distribution(const std::vector<NetLoadScenario>& scenarios, const char* what) {
  if (scenarios.empty()) throw std::invalid_argument(std::string(what) + " scenario set is empty");
  double total = 0.0;
  for (const auto& s : scenarios) {
    if (s.probability < 0.0) throw std::invalid_argument(std::string(what) + " scenario has negative probability");
    total += s.probability;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + " probabilities sum to " + std::to_string(total) + ", not 1");
}

}  // namespace

ExtensiveSolution solve_stochastic(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                                   const DayAheadConfig& config, const lp::SolveOptions& options) {
  check_distribution(scenarios, "stochastic");
  std::vector<WeightedScenario> blocks;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    blocks.push_back({scenarios[s].deltas, scenarios[s].probability, "s" + std::to_string(s)});
  return solve_extensive(system, config, blocks, options);
}

ExtensiveSolution solve_mixed(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                              const std::vector<NetLoadScenario>& robust, double beta, const DayAheadConfig& config,
                              const lp::SolveOptions& options) {
  check_distribution(scenarios, "stochastic");
  if (robust.empty()) throw std::invalid_argument("robust scenario set is empty");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  // Zero-weight blocks are left out so the endpoints are exactly the pure models.
  std::vector<WeightedScenario> blocks;
  if (beta > 0.0)
    for (std::size_t s = 0; s < scenarios.size(); ++s)
      blocks.push_back({scenarios[s].deltas, beta * scenarios[s].probability, "s" + std::to_string(s)});
  const double pj = (1.0 - beta) / static_cast<double>(robust.size());
  if (beta < 1.0)
    for (std::size_t j = 0; j < robust.size(); ++j) blocks.push_back({robust[j].deltas, pj, "j" + std::to_string(j)});
  return solve_extensive(system, config, blocks, options);
}

CcgResult solve_unified(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                        const UncertaintySet& set, double beta, const CcgOptions& options,
                        const DayAheadConfig& config) {
  check_distribution(scenarios, "stochastic");
  return run_ccg(system, scenarios, beta, set, options, config);
}

double recompute_objective(const HydroSystem& system, const ExtensiveSolution& solution) {
  double total = day_ahead_cost(system, solution.schedule);
  for (std::size_t k = 0; k < solution.outcomes.size(); ++k)
    total += solution.weights[k] * solution.outcomes[k].objective;
  return total;
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::deterministic:
      return "det";
    case ModelKind::stochastic:
      return "stoch";
    case ModelKind::robust:
      return "robust";
    case ModelKind::unified:
      return "unified";
    case ModelKind::mixed:
      return "mixed";
  }
  return "det";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "det" || text == "deterministic") return ModelKind::deterministic;
  if (text == "stoch" || text == "stochastic") return ModelKind::stochastic;
  if (text == "robust") return ModelKind::robust;
  if (text == "unified") return ModelKind::unified;
  if (text == "mixed") return ModelKind::mixed;
  throw SpecError("unknown model kind '" + text + "'");
}

void validate_spec(const ModelSpec& spec, std::size_t periods) {
  const bool needs_beta = spec.kind == ModelKind::unified || spec.kind == ModelKind::mixed;
  const bool needs_s = needs_beta || spec.kind == ModelKind::stochastic;
  const bool needs_set = spec.kind == ModelKind::robust || spec.kind == ModelKind::unified ||
                         (spec.kind == ModelKind::mixed && spec.robust_scenarios.empty());
  const std::string kind = to_string(spec.kind);
  if (needs_beta) {
    if (!spec.beta) throw SpecError("model " + kind + " requires beta");
    if (!(*spec.beta >= 0.0 && *spec.beta <= 1.0)) throw SpecError("beta must lie in [0, 1]");
  }
  if (needs_s && spec.scenarios.empty()) throw SpecError("model " + kind + " requires a scenario set");
  for (const auto* set : {&spec.scenarios, &spec.robust_scenarios})
    for (const auto& s : *set)
      if (s.deltas.size() != periods)
        throw SpecError("scenario length " + std::to_string(s.deltas.size()) + " does not match T = " +
                        std::to_string(periods));
  if (needs_s) {
    double total = 0.0;
    for (const auto& s : spec.scenarios) total += s.probability;
    if (std::abs(total - 1.0) > 1e-9) throw SpecError("scenario probabilities must sum to 1");
  }
  if (needs_set) {
    if (!(spec.set.lambda_max > 0.0)) throw SpecError("model " + kind + " requires lambda > 0");
    if (spec.set.gamma < 0 || static_cast<std::size_t>(spec.set.gamma) > periods)
      throw SpecError("gamma must lie in [0, T]");
    if (!(spec.ccg.tolerance > 0.0)) throw SpecError("tolerance must be positive");
  }
  if (spec.reserve_req) {
    if (spec.reserve_req->size() != periods) throw SpecError("reserve requirement must have T entries");
    for (double r : *spec.reserve_req)
      if (!(r >= 0.0)) throw SpecError("reserve requirement must be nonnegative");
  }
}

HydroSystem with_reserve_requirement(const HydroSystem& system, const std::vector<double>& reserve_req) {
  HydroSystem copy = system;
  copy.grid.reserve_req = reserve_req;
  return copy;
}

ModelSolution solve_model(const HydroSystem& system, const ModelSpec& spec) {
  validate_spec(spec, system.periods());
  const HydroSystem effective = spec.reserve_req ? with_reserve_requirement(system, *spec.reserve_req) : system;
  DayAheadConfig config;
  config.include_reserve_req = spec.kind == ModelKind::deterministic || spec.reserve_req.has_value();

  ModelSolution out;
  out.kind = spec.kind;
  switch (spec.kind) {
    case ModelKind::deterministic: {
      out.schedule = solve_day_ahead(effective, config, spec.solver);
      double total_r = 0.0;
      for (std::size_t t = 0; t < system.periods(); ++t) total_r += out.schedule.total_reserve(t);
      out.objective = out.schedule.first_stage_cost + config.epsilon(system) * total_r;
      break;
    }
    case ModelKind::stochastic: {
      auto sol = solve_stochastic(effective, spec.scenarios, config, spec.solver);
      out.schedule = std::move(sol.schedule);
      out.objective = sol.objective;
      break;
    }
    case ModelKind::robust:
    case ModelKind::unified: {
      CcgOptions ccg = spec.ccg;
      ccg.solver = spec.solver;
      auto res = spec.kind == ModelKind::robust ? solve_robust(effective, spec.set, ccg, config)
                                                : solve_unified(effective, spec.scenarios, spec.set, *spec.beta, ccg,
                                                                config);
      require_convergence(res.trace, ccg);
      out.schedule = std::move(res.schedule);
      out.objective = res.objective;
      out.trace = std::move(res.trace);
      out.robust_scenarios = std::move(res.robust_scenarios);
      out.ccg_invoked = true;
      break;
    }
    case ModelKind::mixed: {
      auto robust = spec.robust_scenarios;
      if (robust.empty()) {
        CcgOptions ccg = spec.ccg;
        ccg.solver = spec.solver;
        auto res = solve_robust(effective, spec.set, ccg, config);
        require_convergence(res.trace, ccg);
        robust = res.robust_scenarios;
        out.trace = std::move(res.trace);
        out.ccg_invoked = true;
      }
      auto sol = solve_mixed(effective, spec.scenarios, robust, *spec.beta, config, spec.solver);
      out.schedule = std::move(sol.schedule);
      out.objective = sol.objective;
      out.robust_scenarios = std::move(robust);
      break;
    }
  }
  // Stamp the caller's system: an overridden R_t does not change the plant.
  out.schedule.system_fingerprint = system.fingerprint();
  return out;
}

}  // namespace hydro
