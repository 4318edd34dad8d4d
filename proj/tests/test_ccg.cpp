#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "hydro/ccg.hpp"
#include "hydro/composite.hpp"
#include "hydro/csv.hpp"
#include "oracles.hpp"

using namespace hydro;

namespace {

CcgOptions tight() {
  CcgOptions o;
  o.tolerance = 1e-7;
  return o;
}

void check_trace(const CcgTrace& trace, std::uint64_t set_size) {
  double lb = -lp::kInfinity, ub = lp::kInfinity;
  for (const auto& row : trace.rows) {
    CHECK(row.lower_bound >= lb - 1e-9);
    CHECK(row.upper_bound <= ub + 1e-9);
    lb = row.lower_bound;
    ub = row.upper_bound;
  }
  CHECK(trace.converged);
  CHECK(static_cast<std::uint64_t>(trace.iterations) <= set_size + 1);
  CHECK(trace.gap <= trace.tolerance);
}

HydroSystem c2_periods(std::size_t T) {
  auto sys = fixtures::c2();
  sys.grid.period_hours.resize(T);
  sys.grid.net_load.resize(T);
  sys.grid.reserve_req.resize(T);
  return fixtures::edit_modules(sys, [&](auto& mods) {
    for (auto& m : mods) m.inflow.resize(T);
  });
}

}  // namespace

TEST_CASE("empty budget converges in one iteration") {
  const auto sys = fixtures::c2();
  auto res = solve_robust(sys, {6, 0}, tight());
  CHECK(res.trace.converged);
  CHECK(res.trace.iterations == 1);
  REQUIRE(res.robust_scenarios.size() == 1);
  CHECK(res.robust_scenarios[0].deltas == std::vector<double>(4, 0.0));
  auto joint = solve_stochastic(sys, {{std::vector<double>(4, 0.0), 1.0, ScenarioOrigin::manual}});
  CHECK(res.objective == doctest::Approx(joint.objective).epsilon(1e-9));
}

TEST_CASE("CCG matches the full extensive form on small sets") {
  struct Case {
    std::size_t T;
    double lambda;
    int gamma;
  };
  for (auto c : {Case{4, 6, 1}, Case{4, 3, 2}, Case{3, 6, 2}, Case{3, 6, 3}, Case{2, 9, 2}}) {
    const auto sys = c2_periods(c.T);
    const UncertaintySet set{c.lambda, c.gamma};
    auto all = enumerate(set, c.T);
    REQUIRE(all.size() <= 100);
    const double oracle = oracles::robust_extensive(sys, all);
    auto res = solve_robust(sys, set, tight());
    CHECK(std::abs(res.objective - oracle) <= 1e-6);
    check_trace(res.trace, all.size());
    for (const auto& j : res.robust_scenarios) CHECK(contains(set, j.deltas));
    CHECK(check_schedule(sys, res.schedule).empty());
  }
}

TEST_CASE("warm start") {
  const auto sys = fixtures::c2();
  const UncertaintySet set{6, 2};
  auto cold = solve_robust(sys, set, tight());
  SUBCASE("final J verifies in one iteration") {
    auto opts = tight();
    for (const auto& j : cold.robust_scenarios) opts.warm_start.push_back(j.deltas);
    auto warm = solve_robust(sys, set, opts);
    CHECK(warm.trace.warm_started);
    CHECK(warm.trace.iterations == 1);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
    CHECK(warm.trace.iterations <= cold.trace.iterations);
  }
  SUBCASE("zero vector") {
    auto opts = tight();
    opts.warm_start = {std::vector<double>(4, 0.0)};
    auto warm = solve_robust(sys, set, opts);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
    CHECK(warm.trace.converged);
  }
  SUBCASE("out-of-set scenario") {
    auto opts = tight();
    opts.warm_start = {{6, 6, 6, 0}};
    CHECK_THROWS_AS(solve_robust(sys, set, opts), std::invalid_argument);
    opts.warm_start = {{3, 0, 0, 0}};
    CHECK_THROWS_AS(solve_robust(sys, set, opts), std::invalid_argument);
  }
}

TEST_CASE("iteration limit returns a flagged incumbent") {
  const auto sys = fixtures::c2();
  auto opts = tight();
  opts.max_iterations = 1;
  auto full = solve_robust(sys, {6, 2}, tight());
  if (full.trace.iterations > 1) {
    auto res = solve_robust(sys, {6, 2}, opts);
    CHECK_FALSE(res.trace.converged);
    CHECK(check_schedule(sys, res.schedule).empty());
  }
}

TEST_CASE("trace CSV") {
  const auto sys = fixtures::c2();
  auto res = solve_robust(sys, {6, 2}, tight());
  const auto dir = fixtures::scratch("ccg");
  write_trace_csv(res.trace, (dir / "trace.csv").string(), "m1");
  auto table = read_csv((dir / "trace.csv").string());
  CHECK(table.rows.size() == res.trace.rows.size());
  CHECK(table.header[0] == "iteration");
  CHECK(table.column("lower_bound") == 1);
  CHECK(table.rows[0][table.column("lower_bound")] == "-inf");
  std::ifstream in(dir / "trace.csv");
  std::string first;
  std::getline(in, first);
  CHECK(first == "# manifest: m1");
}

TEST_CASE("argument checks") {
  const auto sys = fixtures::c2();
  CcgOptions bad;
  bad.tolerance = 0;
  CHECK_THROWS_AS(solve_robust(sys, {6, 2}, bad), std::invalid_argument);
  CHECK_THROWS_AS(solve_robust(sys, {6, 5}, {}), std::invalid_argument);
  CHECK_THROWS_AS(solve_robust(sys, {0, 2}, {}), std::invalid_argument);
}

TEST_CASE("node-limited subproblem keeps bounds valid") {
  const auto sys = fixtures::c2();
  const UncertaintySet set{6, 2};
  const double oracle = oracles::robust_extensive(sys, enumerate(set, 4));
  auto opts = tight();
  opts.subproblem_node_limit = 0;
  auto res = solve_robust(sys, set, opts);
  for (const auto& row : res.trace.rows) {
    CHECK(row.lower_bound <= oracle + 1e-6);
    CHECK(row.upper_bound >= oracle - 1e-6);
    CHECK(row.subproblem_bound >= row.subproblem - 1e-9);
  }
  CHECK(check_schedule(sys, res.schedule).empty());
  if (res.trace.converged) CHECK(std::abs(res.objective - oracle) <= 1e-6);
}

TEST_CASE("require_convergence") {
  CcgTrace trace;
  CcgOptions opts;
  trace.converged = true;
  CHECK_NOTHROW(require_convergence(trace, opts));
  trace.converged = false;
  trace.gap = 5;
  CHECK_THROWS_AS(require_convergence(trace, opts), CcgError);
  trace.duplicate_stop = true;
  CHECK_THROWS_AS(require_convergence(trace, opts), CcgError);
  opts.allow_unconverged = true;
  CHECK_NOTHROW(require_convergence(trace, opts));
}
