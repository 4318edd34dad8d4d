#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "hydro/day_ahead.hpp"

using namespace hydro;

namespace {

double total_reserve(const Schedule& s) {
  double r = 0;
  for (const auto& row : s.reserve)
    for (double x : row) r += x;
  return r;
}

HydroSystem with_load(HydroSystem s, std::vector<double> load) {
  s.grid.net_load = std::move(load);
  return s;
}

HydroSystem with_reserve(HydroSystem s, std::vector<double> req) {
  s.grid.reserve_req = std::move(req);
  return s;
}

}  // namespace

TEST_CASE("C1 day-ahead optimum") {
  const auto sys = fixtures::c1();
  auto s = solve_day_ahead(sys);
  // 10 MW at 2 MW per m3/s needs 5 m3/s for one hour: 0.018 Mm3.
  CHECK(s.first_stage_cost == doctest::Approx(-482.0).epsilon(1e-12));
  CHECK(s.production[0][0] == doctest::Approx(10));
  CHECK(s.reserve[0][0] == doctest::Approx(0).scale(1));
  CHECK(s.volume[0][1] == doctest::Approx(0.482));
  CHECK(s.segment_discharge[0][0][0] == doctest::Approx(5));
  CHECK(day_ahead_cost(sys, s) == doctest::Approx(-482.0));
  CHECK(check_schedule(sys, s).empty());
}

TEST_CASE("C1 with zero load keeps all water") {
  const auto sys = with_load(fixtures::c1(), {0});
  auto s = solve_day_ahead(sys);
  CHECK(s.first_stage_cost == doctest::Approx(-500.0));
  CHECK(s.segment_discharge[0][0][0] == doctest::Approx(0).scale(1));
  CHECK(s.bypass[0][0] == doctest::Approx(0).scale(1));
  CHECK(s.spill[0][0] == doctest::Approx(0).scale(1));
}

TEST_CASE("C1 with an unattainable reserve requirement") {
  const auto sys = with_reserve(fixtures::c1(), {15});
  try {
    solve_day_ahead(sys);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.group() == "reserve_requirement");
  }
  // 10 MW is the largest symmetric band around p = 10 within [0, 20].
  auto s = solve_day_ahead(with_reserve(fixtures::c1(), {10}));
  CHECK(s.reserve[0][0] == doctest::Approx(10));
}

TEST_CASE("overloaded system reports the power balance") {
  const auto sys = with_load(fixtures::c1(), {25});
  try {
    solve_day_ahead(sys);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.group() == "power_balance");
  }
}

TEST_CASE("forced bypass on C1") {
  const auto sys = fixtures::c1();
  const auto& mod = sys.topology[0];
  auto base = build_day_ahead(sys);
  auto forced = build_day_ahead(sys);
  forced.program.set_bounds(forced.vars.hydro.bypass[0][0], 1, 1);
  auto r0 = lp::solve(base.program);
  auto r1 = lp::solve(forced.program);
  REQUIRE(r1.optimal());
  // Penalty C^b F plus the water value of the volume leaving the system.
  const double F = sys.grid.period_hours[0];
  const double expected = sys.costs.bypass_penalty * F + mod.water_value * flow_to_volume(1, F);
  CHECK(r1.objective - r0.objective == doctest::Approx(expected).epsilon(1e-9));
  CHECK(day_ahead_cost(sys, extract_schedule(sys, forced.vars, r1)) == doctest::Approx(-482.0 + expected));
}

TEST_CASE("invalid schedules are rejected") {
  const auto sys = fixtures::c1();
  auto s = solve_day_ahead(sys);
  auto zero = s;
  zero.production[0][0] = 0;
  zero.segment_discharge[0][0][0] = 0;
  zero.flow_out[0][0] = 0;
  zero.volume[0][1] = 0.5;
  CHECK_THROWS_AS(day_ahead_cost(sys, zero), InvalidScheduleError);
  auto leaky = s;
  leaky.volume[0][1] += 1e-7;
  CHECK_THROWS_AS(day_ahead_cost(sys, leaky), InvalidScheduleError);
}

TEST_CASE("C2 routing") {
  const auto sys = fixtures::c2();
  auto s = solve_day_ahead(sys);
  CHECK(check_schedule(sys, s).empty());
  for (std::size_t t = 0; t < sys.periods(); ++t) {
    double from_a = s.bypass[0][t] + s.spill[0][t];
    for (const auto& seg : s.segment_discharge[0]) from_a += seg[t];
    CHECK(s.flow_in[1][t] == doctest::Approx(from_a).epsilon(1e-12));
    double p = 0;
    for (std::size_t m = 0; m < sys.modules(); ++m) p += s.production[m][t];
    CHECK(p == doctest::Approx(sys.grid.net_load[t]));
  }
}

TEST_CASE("recomputed cost matches the solver objective") {
  const std::vector<std::pair<const char*, double>> cases{{"c1.json", 5}, {"c2.json", 3}, {"synthetic12.json", 42}};
  for (const auto& [name, req] : cases) {
    auto sys = load_system(fixtures::data(name));
    sys.grid.reserve_req.assign(sys.periods(), req);
    auto model = build_day_ahead(sys);
    auto r = lp::solve(model.program);
    REQUIRE(r.optimal());
    auto s = extract_schedule(sys, model.vars, r);
    CHECK(check_schedule(sys, s).empty());
    const double eps = sys.costs.reserve_epsilon;
    CHECK(std::abs(day_ahead_cost(sys, s) - (r.objective - eps * total_reserve(s))) <= 1e-6);
    for (std::size_t t = 0; t < sys.periods(); ++t) CHECK(s.total_reserve(t) >= req - 1e-6);
  }
}

TEST_CASE("raising the reserve requirement never lowers the optimum") {
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1.5);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> req(sys.periods());
    double prev = -1e300;
    for (int step = 0; step < 4; ++step) {
      auto s = solve_day_ahead(with_reserve(sys, req));
      CHECK(s.first_stage_cost >= prev - 1e-7);
      prev = s.first_stage_cost;
      for (auto& x : req) x += u(rng);
    }
  }
}

TEST_CASE("optimal schedules conserve water and power") {
  const auto sys = fixtures::synthetic();
  for (double req : {0.0, 42.0}) {
    auto s = solve_day_ahead(with_reserve(sys, std::vector<double>(sys.periods(), req)));
    ScheduleTolerance tight;
    tight.water = 1e-9;
    CHECK(check_schedule(sys, s, tight).empty());
  }
}
