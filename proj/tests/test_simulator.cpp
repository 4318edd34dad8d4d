#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "fixtures.hpp"
#include "hydro/composite.hpp"
#include "hydro/csv.hpp"
#include "hydro/simulator.hpp"

using namespace hydro;

namespace {

MonteCarloConfig config(double lambda, std::size_t n, std::uint64_t seed = 5, unsigned threads = 1) {
  MonteCarloConfig c;
  c.lambda_max = lambda;
  c.samples = n;
  c.seed = seed;
  c.threads = threads;
  return c;
}

}  // namespace

TEST_CASE("procurement cost") {
  const auto sys = fixtures::c2();
  const auto base = compute_baseline(sys);
  auto s0 = solve_day_ahead(with_reserve_requirement(sys, std::vector<double>(4, 0.0)));
  s0.system_fingerprint = sys.fingerprint();
  CHECK(procurement_cost(sys, s0, base) == doctest::Approx(0).scale(1e-6));
  auto s3 = solve_day_ahead(with_reserve_requirement(sys, std::vector<double>(4, 3.0)));
  s3.system_fingerprint = sys.fingerprint();
  CHECK(procurement_cost(sys, s3, base) >= -1e-9);
  SUBCASE("fingerprints must agree") {
    auto other = fixtures::c1();
    CHECK_THROWS_AS(procurement_cost(other, s0, base), FingerprintMismatch);
    auto foreign = s0;
    foreign.system_fingerprint = "0000";
    CHECK_THROWS_AS(procurement_cost(sys, foreign, base), FingerprintMismatch);
  }
}

TEST_CASE("balancing cost on C1") {
  const auto sys = fixtures::c1();
  auto s = solve_day_ahead(sys);
  CHECK(balancing_cost(sys, s, std::vector<double>{0}) == doctest::Approx(0).scale(1e-6));
  // Without reserve an upward deviation is shed, while perfect foresight
  // produces it at the cost of 2.5 m3/s of stored water.
  const double lambda = 5;
  const double water = sys.topology[0].water_value * flow_to_volume(2.5, 1.0);
  CHECK(balancing_cost(sys, s, std::vector<double>{lambda}) ==
        doctest::Approx(sys.costs.load_shed * lambda - water).epsilon(1e-9));
  for (double d : {-5.0, -1.0, 2.0, 5.0}) CHECK(balancing_cost(sys, s, std::vector<double>{d}) >= -1e-7);
}

TEST_CASE("zero spread leaves only procurement") {
  const auto sys = fixtures::c2();
  const auto base = compute_baseline(sys);
  auto s = solve_day_ahead(with_reserve_requirement(sys, std::vector<double>(4, 2.0)));
  s.system_fingerprint = sys.fingerprint();
  auto rep = run_monte_carlo(sys, s, base, config(0, 20));
  for (std::size_t i = 0; i < rep.U.size(); ++i) {
    CHECK(rep.B[i] == doctest::Approx(0).scale(1e-6));
    CHECK(rep.U[i] == doctest::Approx(rep.K).scale(1e-6));
  }
}

TEST_CASE("Monte Carlo determinism") {
  const auto sys = fixtures::c2();
  const auto base = compute_baseline(sys);
  auto s = solve_day_ahead(with_reserve_requirement(sys, std::vector<double>(4, 2.0)));
  s.system_fingerprint = sys.fingerprint();
  auto a = run_monte_carlo(sys, s, base, config(6, 60, 9, 1));
  auto b = run_monte_carlo(sys, s, base, config(6, 60, 9, 1));
  auto c = run_monte_carlo(sys, s, base, config(6, 60, 9, 4));
  CHECK(a.U == b.U);
  CHECK(a.U == c.U);
  CHECK(a.u_mean == c.u_mean);
  for (std::size_t i = 0; i < a.U.size(); ++i) {
    CHECK(a.B[i] >= -1e-7);
    CHECK(a.U[i] == doctest::Approx(a.K + a.B[i]).epsilon(1e-12));
  }
  auto d = run_monte_carlo(sys, s, base, config(6, 60, 10, 1));
  CHECK(a.U != d.U);
}

TEST_CASE("aggregates") {
  std::vector<double> odd{3, 1, 2};
  auto a = aggregate(odd);
  CHECK(a.max == 3);
  CHECK(a.mean == doctest::Approx(2));
  CHECK(a.median == 2);
  CHECK(a.std == doctest::Approx(1));
  std::vector<double> even{4, 1, 3, 2};
  auto b = aggregate(even);
  CHECK(b.median == doctest::Approx(2.5));
  CHECK(b.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  std::vector<double> one{7};
  CHECK(aggregate(one).std == 0);
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  try {
    parallel_for(50, 3, [](std::size_t i) {
      if (i == 17 || i == 31) throw std::runtime_error("boom " + std::to_string(i));
    });
    FAIL("expected failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "boom 17");
  }
  CHECK(SampleError(4, "x").index() == 4);
}

TEST_CASE("sweep") {
  const auto sys = fixtures::c2();
  const auto S = sample(Distribution::truncated_normal, 6, 4, 6, 1);
  auto ccg = solve_robust(sys, {6, 2});
  const auto cfg = config(6, 40, 3, 2);
  SUBCASE("β = 1 is the stochastic schedule") {
    auto rows = sweep_beta(sys, S, ccg.robust_scenarios, {1.0}, cfg);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].report.has_value());
    auto st = solve_stochastic(sys, S);
    st.schedule.system_fingerprint = sys.fingerprint();
    auto direct = run_monte_carlo(sys, st.schedule, compute_baseline(sys), cfg);
    CHECK(rows[0].report->K == doctest::Approx(direct.K).epsilon(1e-9));
    CHECK(rows[0].report->u_mean == doctest::Approx(direct.u_mean).epsilon(1e-9));
  }
  SUBCASE("grid") {
    auto betas = parse_betas("0:1:0.1");
    REQUIRE(betas.size() == 11);
    CHECK(betas.front() == 0);
    CHECK(betas.back() == 1);
    CHECK(betas[3] == doctest::Approx(0.3));
    auto rows = sweep_beta(sys, S, ccg.robust_scenarios, {0.0, 0.5, 1.0}, cfg);
    CHECK(rows.size() == 3);
    for (const auto& r : rows) {
      CHECK(r.error.empty());
      CHECK(r.report->K >= -1e-7);
    }
  }
  SUBCASE("parsing") {
    CHECK(parse_betas("0,0.5,1") == std::vector<double>{0, 0.5, 1});
    CHECK_THROWS_AS(parse_betas("0,1.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_betas("x"), std::invalid_argument);
  }
}

TEST_CASE("single deviations are covered by reserves of matching size") {
  const auto sys = fixtures::c2();
  const double lambda = 3;
  auto s = solve_day_ahead(with_reserve_requirement(sys, std::vector<double>(4, lambda)));
  s.system_fingerprint = sys.fingerprint();
  for (std::size_t t = 0; t < 4; ++t)
    for (double sign : {1.0, -1.0}) {
      std::vector<double> d(4, 0.0);
      d[t] = sign * lambda;
      auto out = solve_balancing(sys, s, d);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(out.shed[k] == doctest::Approx(0).scale(1e-6));
        CHECK(out.power_spill[k] == doctest::Approx(0).scale(1e-6));
      }
    }
}

TEST_CASE("report files") {
  const auto sys = fixtures::c2();
  auto s = solve_day_ahead(sys);
  auto rep = run_monte_carlo(sys, s, compute_baseline(sys), config(6, 10));
  const auto dir = fixtures::scratch("simulator");
  write_report_csv({{"det", rep}}, (dir / "report.csv").string(), "id1");
  write_samples_csv(rep, (dir / "samples.csv").string(), "id1");
  auto report = read_csv((dir / "report.csv").string());
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0][report.column("label")] == "det");
  auto samples = read_csv((dir / "samples.csv").string());
  CHECK(samples.rows.size() == 10);
  CHECK(std::stod(samples.rows[3][samples.column("U")]) == doctest::Approx(rep.U[3]).epsilon(1e-12));
}
