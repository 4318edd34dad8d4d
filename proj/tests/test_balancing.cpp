#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "hydro/balancing.hpp"
#include "hydro/day_ahead.hpp"
#include "hydro/uncertainty.hpp"

using namespace hydro;

namespace {

// Valid schedules with varied reserves: random requirements and water values.
Schedule random_schedule(const HydroSystem& sys, std::mt19937_64& rng, double max_req) {
  std::uniform_real_distribution<double> u(0, 1);
  auto copy = fixtures::edit_modules(sys, [&](auto& mods) {
    for (auto& m : mods) m.water_value *= 0.5 + u(rng);
  });
  for (auto& r : copy.grid.reserve_req) r = max_req * u(rng);
  auto s = solve_day_ahead(copy);
  s.system_fingerprint = sys.fingerprint();
  return s;
}

std::vector<double> random_vertex(std::size_t T, double lambda, int gamma, std::mt19937_64& rng) {
  std::vector<double> d(T, 0.0);
  std::vector<std::size_t> idx(T);
  for (std::size_t t = 0; t < T; ++t) idx[t] = t;
  std::shuffle(idx.begin(), idx.end(), rng);
  const int k = static_cast<int>(rng() % (gamma + 1));
  for (int i = 0; i < k; ++i) d[idx[i]] = rng() % 2 ? lambda : -lambda;
  return d;
}

}  // namespace

TEST_CASE("C1 balancing examples") {
  const auto sys = fixtures::c1();
  const auto s = solve_day_ahead(sys);
  SUBCASE("no deviation reproduces the schedule") {
    auto out = solve_balancing(sys, s, std::vector<double>{0});
    CHECK(out.objective == doctest::Approx(-482.0));
    CHECK(out.production[0][0] == doctest::Approx(10));
    CHECK(check_outcome(sys, &s, std::vector<double>{0}, out).empty());
  }
  SUBCASE("upward deviation without reserve is shed") {
    const double lambda = 5;
    auto out = solve_balancing(sys, s, std::vector<double>{lambda});
    CHECK(out.shed[0] == doctest::Approx(lambda));
    CHECK(out.objective == doctest::Approx(-482.0 + sys.costs.load_shed * lambda));
  }
  SUBCASE("reserves never hurt") {
    auto with_r = solve_day_ahead([&] {
      auto c = sys;
      c.grid.reserve_req = {5};
      return c;
    }());
    auto no_r = with_r;
    no_r.reserve[0][0] = 0;
    auto a = solve_balancing(sys, with_r, std::vector<double>{0});
    auto b = solve_balancing(sys, no_r, std::vector<double>{0});
    CHECK(a.objective <= b.objective + 1e-9);
  }
  SUBCASE("perfect foresight") {
    CHECK(solve_perfect_foresight(sys, std::vector<double>{0}).objective == doctest::Approx(-482.0));
    auto pf = solve_perfect_foresight(sys, std::vector<double>{5});
    CHECK(pf.shed[0] == doctest::Approx(0).scale(1));
    CHECK(pf.discharge[0][0] == doctest::Approx(7.5));  // 5 + 2.5 m3/s
    CHECK(check_outcome(sys, nullptr, std::vector<double>{5}, pf).empty());
  }
}

TEST_CASE("perfect foresight is a relaxation") {
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int k = 0; k < 15; ++k) {
    auto s = random_schedule(sys, rng, 3);
    std::vector<double> d(sys.periods());
    for (auto& x : d) x = u(rng);
    CHECK(solve_perfect_foresight(sys, d).objective <= solve_balancing(sys, s, d).objective + 1e-7);
  }
}

TEST_CASE("worst case on C1") {
  const auto sys = fixtures::c1();
  const auto s = solve_day_ahead(sys);
  const double lambda = 5;
  auto z0 = solve_balancing(sys, s, std::vector<double>{0}).objective;
  SUBCASE("empty budget") {
    auto wc = solve_worst_case(sys, s, lambda, 0);
    CHECK(wc.value == doctest::Approx(z0).epsilon(1e-9));
    CHECK(wc.deltas == std::vector<double>{0});
  }
  SUBCASE("one period may deviate") {
    auto wc = solve_worst_case(sys, s, lambda, 1);
    CHECK(wc.value == doctest::Approx(z0 + sys.costs.load_shed * lambda).epsilon(1e-9));
    CHECK(wc.deltas == std::vector<double>{lambda});
    CHECK(wc.up == std::vector<int>{1});
  }
}

TEST_CASE("worst-case MILP equals brute force over the set") {
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(21);
  for (int k = 0; k < 6; ++k) {
    auto s = random_schedule(sys, rng, 4);
    for (int gamma : {0, 1, 2}) {
      const double lambda = k % 2 ? 6.0 : 2.5;
      double best = -1e300;
      for (const auto& d : enumerate({lambda, gamma}, sys.periods()))
        best = std::max(best, solve_balancing(sys, s, d).objective);
      auto wc = solve_worst_case(sys, s, lambda, gamma);
      CHECK(std::abs(wc.value - best) <= 1e-6 * (1 + std::abs(best)));
      CHECK(contains({lambda, gamma}, wc.deltas));
      CHECK(solve_balancing(sys, s, wc.deltas).objective == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("strong duality at fixed binaries") {
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    auto s = random_schedule(sys, rng, 4);
    const double lambda = 1 + 5 * std::uniform_real_distribution<double>(0, 1)(rng);
    auto d = random_vertex(sys.periods(), lambda, 4, rng);
    const double primal = solve_balancing(sys, s, d).objective;
    auto model = build_worst_case_milp(sys, s, lambda, 4);
    fix_deviation(model, d);
    const double dual = solve_worst_case(model).value;
    CHECK(std::abs(primal - dual) <= 1e-6 * (1 + std::abs(primal)));
  }
}

TEST_CASE("power balance duals stay within the shed and spill prices") {
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-8, 8);
  for (int k = 0; k < 20; ++k) {
    auto s = random_schedule(sys, rng, 3);
    std::vector<double> d(sys.periods());
    for (auto& x : d) x = u(rng);
    // The plain dual LP, without the explicit bounds the MILP adds.
    auto primal = build_balancing_primal(sys, s, d);
    auto dual = lp::dualize(primal.program);
    auto r = lp::solve(dual.program);
    REQUIRE(r.optimal());
    for (auto row : primal.vars.power_balance) {
      const double lam = r.value(dual.row_dual[row.index]);
      CHECK(lam >= -sys.costs.power_spill - 1e-9);
      CHECK(lam <= sys.costs.load_shed + 1e-9);
    }
    // Same multipliers as the solver reports for the primal rows.
    auto pr = lp::solve(primal.program);
    CHECK(r.objective == doctest::Approx(pr.objective).epsilon(1e-9));
  }
}

TEST_CASE("complete recourse") {
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(77);
  const double lambda = 6;
  std::uniform_real_distribution<double> u(-lambda, lambda);
  auto s = random_schedule(sys, rng, 2);
  int failures = 0, invalid = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> d(sys.periods());
    for (auto& x : d) x = u(rng);
    try {
      auto out = solve_balancing(sys, s, d);
      if (!check_outcome(sys, &s, d, out).empty()) ++invalid;
    } catch (const lp::SolverError&) {
      ++failures;
    }
  }
  CHECK(failures == 0);
  CHECK(invalid == 0);
}

TEST_CASE("fix_deviation rejects non-vertices") {
  const auto sys = fixtures::c2();
  auto s = solve_day_ahead(sys);
  auto model = build_worst_case_milp(sys, s, 6, 2);
  CHECK_THROWS_AS(fix_deviation(model, std::vector<double>{3, 0, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(build_worst_case_milp(sys, s, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(solve_balancing(sys, s, std::vector<double>{0}), std::invalid_argument);
}

TEST_CASE("node-limited worst case brackets the maximum") {
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(5);
  lp::SolveOptions limited;
  limited.mip_node_limit = 0;
  for (int k = 0; k < 4; ++k) {
    auto s = random_schedule(sys, rng, 4);
    const UncertaintySet set{6.0, 2};
    double best = -1e300;
    for (const auto& d : enumerate(set, sys.periods())) best = std::max(best, solve_balancing(sys, s, d).objective);
    auto wc = solve_worst_case(sys, s, set.lambda_max, set.gamma, limited);
    CHECK(contains(set, wc.deltas));
    CHECK(wc.value <= best + 1e-6);
    CHECK(wc.bound >= best - 1e-6);
    CHECK(wc.bound >= wc.value);
    CHECK(solve_balancing(sys, s, wc.deltas).objective == doctest::Approx(wc.value).epsilon(1e-9));
    if (wc.proven) CHECK(wc.value == doctest::Approx(best).epsilon(1e-9));
  }
}
