#include <doctest.h>

#include <cmath>
#include <random>

#include "hydro/lp.hpp"

using namespace hydro::lp;

namespace {

// Feasible, bounded random LP: rows are built around an interior point x0.
LinearProgram random_lp(std::mt19937_64& rng, std::size_t n, std::size_t m, bool odd_bounds) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> pos(0.1, 3);
  LinearProgram lp;
  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) {
    double lo = 0, hi = pos(rng) + 1;
    if (odd_bounds && j % 3 == 1) lo = -pos(rng);
    if (odd_bounds && j % 3 == 2) hi = kInfinity;
    lp.add_variable("x" + std::to_string(j), lo, hi);
    x0[j] = std::isfinite(hi) ? lo + (hi - lo) * 0.4 : lo + 0.7;
    // Nonnegative costs on columns without an upper bound keep the LP bounded.
    lp.add_objective(VarId{j}, std::isfinite(hi) ? 3 * u(rng) : pos(rng));
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Term> terms;
    double lhs = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (rng() % 2) {
        const double a = 2 * u(rng);
        terms.push_back({VarId{j}, a});
        lhs += a * x0[j];
      }
    const auto kind = rng() % 3;
    const RowSense sense = kind == 0 ? RowSense::less_equal : kind == 1 ? RowSense::greater_equal : RowSense::equal;
    const double rhs = sense == RowSense::less_equal ? lhs + pos(rng) : sense == RowSense::greater_equal ? lhs - pos(rng) : lhs;
    lp.add_constraint("r" + std::to_string(i), std::move(terms), sense, rhs);
  }
  lp.add_objective_constant(u(rng));
  return lp;
}

}  // namespace

TEST_CASE("worked examples") {
  SUBCASE("min x s.t. x >= 3") {
    LinearProgram lp;
    auto x = lp.add_variable("x", -kInfinity, kInfinity);
    lp.add_objective(x, 1);
    auto row = lp.add_constraint("c", {{x, 1}}, RowSense::greater_equal, 3);
    auto r = solve(lp);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(3));
    CHECK(r.dual(row) == doctest::Approx(1));
    CHECK(r.dual_objective == doctest::Approx(3));
  }
  SUBCASE("empty objective on a box") {
    LinearProgram lp;
    lp.add_variable("a", 0, 1);
    lp.add_variable("b", -2, 5);
    auto r = solve(lp);
    REQUIRE(r.optimal());
    CHECK(r.objective == 0.0);
  }
  SUBCASE("relaxed and binary agree at an integral vertex") {
    // Only binary integers exist, so x = 5y with y in [0, 1].
    for (auto type : {VarType::continuous, VarType::binary}) {
      LinearProgram lp;
      auto y = lp.add_variable("y", 0, 1, type);
      lp.add_objective(y, -5);
      lp.add_constraint("cap", {{y, 5}}, RowSense::less_equal, 5);
      auto r = solve(lp);
      REQUIRE(r.optimal());
      CHECK(r.objective == doctest::Approx(-5));
      CHECK(r.has_duals() == (type == VarType::continuous));
    }
  }
}

TEST_CASE("dual sign convention") {
  SUBCASE("<= row under minimize") {
    LinearProgram lp;
    auto x = lp.add_variable("x", 0, kInfinity);
    lp.add_objective(x, -1);
    auto row = lp.add_constraint("c", {{x, 1}}, RowSense::less_equal, 5);
    auto r = solve(lp);
    CHECK(r.dual(row) == doctest::Approx(-1));
  }
  SUBCASE("maximize reports d(obj)/d(rhs)") {
    LinearProgram lp;
    lp.set_sense(ObjectiveSense::maximize);
    auto x = lp.add_variable("x", 0, kInfinity);
    lp.add_objective(x, 2);
    auto row = lp.add_constraint("c", {{x, 1}}, RowSense::less_equal, 5);
    auto r = solve(lp);
    CHECK(r.objective == doctest::Approx(10));
    CHECK(r.dual(row) == doctest::Approx(2));
    CHECK(r.dual_objective == doctest::Approx(10));
  }
  SUBCASE("finite-difference check on random LPs") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k) {
      auto lp = random_lp(rng, 6, 5, false);
      auto r = solve(lp);
      REQUIRE(r.optimal());
      for (std::size_t i = 0; i < lp.num_constraints(); ++i) {
        auto moved = lp;
        const double h = 1e-5;
        moved.set_rhs(RowId{i}, lp.constraint(RowId{i}).rhs + h);
        auto r2 = solve(moved);
        if (!r2.optimal()) continue;
        // Valid away from degenerate breakpoints; allow one-sided slack.
        const double fd = (r2.objective - r.objective) / h;
        CHECK(std::abs(fd - r.duals[i]) < 1e-3 + 1e-3 * std::abs(fd));
      }
    }
  }
}

TEST_CASE("strong duality and residual gates on random LPs") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 40; ++k) {
    auto lp = random_lp(rng, 8, 6, k % 2 == 1);
    if (k % 4 == 3) lp.set_sense(ObjectiveSense::maximize);
    auto r = solve(lp);
    if (!r.optimal()) {
      CHECK(lp.sense() == ObjectiveSense::maximize);  // only maximization can run off along free columns
      continue;
    }
    CHECK(std::abs(r.objective - r.dual_objective) <= 1e-6 * (1 + std::abs(r.objective)));
    auto res = residuals(lp, r.primal);
    CHECK(res.row <= 1e-6);
    CHECK(res.bound <= 1e-9);
    CHECK(r.objective == doctest::Approx(lp.evaluate_objective(r.primal)));
  }
}

TEST_CASE("dualize reproduces the primal optimum") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 30; ++k) {
    auto lp = random_lp(rng, 7, 5, true);
    auto primal = solve(lp);
    REQUIRE(primal.optimal());
    auto dual = dualize(lp);
    CHECK(dual.program.sense() == ObjectiveSense::maximize);
    CHECK(dual.row_dual.size() == lp.num_constraints());
    auto d = solve(dual.program);
    REQUIRE(d.optimal());
    CHECK(std::abs(primal.objective - d.objective) <= 1e-6 * (1 + std::abs(primal.objective)));
    // Row duals of the generic solver are a feasible point of the dual program.
    for (std::size_t i = 0; i < lp.num_constraints(); ++i) {
      const auto sense = lp.constraint(RowId{i}).sense;
      const double y = d.value(dual.row_dual[i]);
      if (sense == RowSense::less_equal) CHECK(y <= 1e-9);
      if (sense == RowSense::greater_equal) CHECK(y >= -1e-9);
    }
  }
}

TEST_CASE("status reporting") {
  SUBCASE("infeasible") {
    LinearProgram lp;
    auto x = lp.add_variable("x", 0, 1);
    lp.add_constraint("c", {{x, 1}}, RowSense::greater_equal, 2);
    CHECK(solve(lp).status == SolveStatus::infeasible);
  }
  SUBCASE("unbounded") {
    LinearProgram lp;
    auto x = lp.add_variable("x", 0, kInfinity);
    lp.add_objective(x, -1);
    lp.add_constraint("c", {{x, 1}}, RowSense::greater_equal, 1);
    CHECK(solve(lp).status == SolveStatus::unbounded);
  }
  SUBCASE("inconsistent programs are rejected before dispatch") {
    LinearProgram lp;
    auto x = lp.add_variable("x", 0, 1);
    lp.set_bounds(x, 2, 1);
    CHECK_FALSE(lp.check().empty());
    CHECK_THROWS_AS(solve(lp), ModelError);
  }
  SUBCASE("duplicate names") {
    LinearProgram lp;
    lp.add_variable("x");
    CHECK_THROWS_AS(lp.add_variable("x"), ModelError);
  }
}

TEST_CASE("deterministic build") {
  auto build = [] {
    std::mt19937_64 rng(99);
    return random_lp(rng, 10, 8, true);
  };
  auto a = build(), b = build();
  CHECK(to_lp_format(a) == to_lp_format(b));
  auto ra = solve(a), rb = solve(b);
  CHECK(ra.primal == rb.primal);
  auto values = named_values(a, ra);
  CHECK(values.at("x0") == ra.primal[0]);
}

TEST_CASE("mip gap defaults") {
  SolveOptions o;
  CHECK(o.mip_abs_gap == 0.0);
  CHECK(o.integrality_tolerance == 1e-9);
  // Small knapsack checked against enumeration.
  const std::vector<double> w{3, 4, 5, 9, 2}, v{4, 5, 6, 11, 2};
  LinearProgram lp;
  lp.set_sense(ObjectiveSense::maximize);
  std::vector<Term> cap;
  for (std::size_t j = 0; j < w.size(); ++j) {
    auto y = lp.add_variable("y" + std::to_string(j), 0, 1, VarType::binary);
    lp.add_objective(y, v[j]);
    cap.push_back({y, w[j]});
  }
  lp.add_constraint("cap", cap, RowSense::less_equal, 13);
  double best = 0;
  for (unsigned mask = 0; mask < 32; ++mask) {
    double ww = 0, vv = 0;
    for (unsigned j = 0; j < 5; ++j)
      if (mask >> j & 1) ww += w[j], vv += v[j];
    if (ww <= 13) best = std::max(best, vv);
  }
  auto r = solve(lp);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(best));
}

TEST_CASE("node limit keeps the incumbent and a valid bound") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1, 10);
  LinearProgram lp;
  lp.set_sense(ObjectiveSense::maximize);
  std::vector<Term> cap, cap2;
  double total = 0;
  for (std::size_t j = 0; j < 40; ++j) {
    auto y = lp.add_variable("y" + std::to_string(j), 0, 1, VarType::binary);
    const double w = u(rng);
    lp.add_objective(y, w + u(rng) * 0.3);
    cap.push_back({y, w});
    cap2.push_back({y, u(rng)});
    total += w;
  }
  lp.add_constraint("cap", cap, RowSense::less_equal, total / 2);
  lp.add_constraint("cap2", cap2, RowSense::less_equal, total / 3);
  const auto exact = solve(lp);
  REQUIRE(exact.optimal());
  CHECK(exact.objective_bound == exact.objective);
  SolveOptions o;
  o.mip_node_limit = 0;
  const auto r = solve(lp, o);
  CHECK((r.optimal() || r.status == SolveStatus::limit));
  CHECK(r.objective_bound >= exact.objective - 1e-6);
  if (r.has_incumbent()) {
    CHECK(r.objective <= exact.objective + 1e-6);
    CHECK(r.objective == doctest::Approx(lp.evaluate_objective(r.primal)).epsilon(1e-12));
  }
}
