#pragma once

#include <vector>

#include "hydro/balancing.hpp"
#include "hydro/day_ahead.hpp"
#include "hydro/lp.hpp"

namespace oracles {

/// min Z^da + ε Σr + θ with θ >= Z^bal(y_j) for every listed deviation:
/// the robust problem over a finite set written out in full.
inline double robust_extensive(const hydro::HydroSystem& sys, const std::vector<std::vector<double>>& deltas) {
  using namespace hydro;
  lp::LinearProgram prog;
  DayAheadConfig config;
  config.include_reserve_req = false;
  auto fs = add_first_stage(prog, sys, config, "x");
  add_first_stage_objective(prog, sys, config, fs);
  auto theta = prog.add_variable("theta", -lp::kInfinity, lp::kInfinity);
  prog.add_objective(theta, 1.0);
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    auto b = add_balancing_block(prog, sys, "o" + std::to_string(j), deltas[j], fs);
    auto cut = b.cost.scaled(-1.0);
    cut.add(theta, 1.0);
    prog.add_constraint("epi" + std::to_string(j), cut, lp::RowSense::greater_equal, 0.0);
  }
  auto r = lp::solve(prog);
  if (!r.optimal()) throw lp::SolverError("oracle did not solve");
  return r.objective;
}

}  // namespace oracles
