#include <doctest.h>

#include "fixtures.hpp"
#include "hydro/composite.hpp"
#include "hydro/simulator.hpp"

using namespace hydro;

namespace {

const UncertaintySet kSet{6, 2};

std::vector<NetLoadScenario> sampled(std::size_t n, std::uint64_t seed = 1) {
  return sample(Distribution::truncated_normal, kSet.lambda_max, 4, n, seed);
}

// Equiprobable vertices of the set, so S lies inside it.
std::vector<NetLoadScenario> vertex_scenarios() {
  auto all = enumerate(kSet, 4);
  std::vector<NetLoadScenario> out;
  for (std::size_t i = 0; i < all.size(); i += 4) out.push_back({all[i], 0.0, ScenarioOrigin::manual});
  equalize(out);
  return out;
}

CcgOptions tight() {
  CcgOptions o;
  o.tolerance = 1e-7;
  return o;
}

}  // namespace

TEST_CASE("stochastic model with the zero scenario") {
  const auto sys = fixtures::c2();
  auto det = solve_day_ahead(sys, default_two_stage_config());
  auto st = solve_stochastic(sys, {{std::vector<double>(4, 0.0), 1.0, ScenarioOrigin::manual}});
  // Balancing at zero deviation can repeat the schedule, so both stages cost Z^da_0.
  CHECK(st.objective == doctest::Approx(2 * det.first_stage_cost).epsilon(1e-9));
  CHECK(check_schedule(sys, st.schedule).empty());
}

TEST_CASE("duplicated scenarios merge") {
  const auto sys = fixtures::c2();
  auto s = sampled(1);
  auto once = solve_stochastic(sys, s);
  auto twice = solve_stochastic(sys, {{s[0].deltas, 0.5, ScenarioOrigin::sampled}, {s[0].deltas, 0.5, ScenarioOrigin::sampled}});
  CHECK(twice.objective == doctest::Approx(once.objective).epsilon(1e-9));
}

TEST_CASE("objective decomposes into its stages") {
  const auto sys = fixtures::c2();
  auto st = solve_stochastic(sys, sampled(10));
  CHECK(std::abs(st.objective - st.reserve_term - recompute_objective(sys, st)) <= 1e-6);
  for (std::size_t k = 0; k < st.outcomes.size(); ++k) CHECK(st.weights[k] == doctest::Approx(0.1));
  auto mixed = solve_mixed(sys, sampled(6), vertex_scenarios(), 0.4);
  CHECK(std::abs(mixed.objective - mixed.reserve_term - recompute_objective(sys, mixed)) <= 1e-6);
  double w = 0;
  for (double x : mixed.weights) w += x;
  CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("probabilities must sum to one") {
  const auto sys = fixtures::c2();
  auto s = sampled(3);
  s[0].probability = 0.9;
  CHECK_THROWS_AS(solve_stochastic(sys, s), std::invalid_argument);
}

TEST_CASE("mixed model endpoints") {
  const auto sys = fixtures::c2();
  const auto S = sampled(8);
  const auto J = vertex_scenarios();
  auto st = solve_stochastic(sys, S);
  CHECK(solve_mixed(sys, S, J, 1.0).objective == doctest::Approx(st.objective).epsilon(1e-9));
  auto rj = solve_stochastic(sys, J);
  CHECK(solve_mixed(sys, S, J, 0.0).objective == doctest::Approx(rj.objective).epsilon(1e-9));
  SUBCASE("S equal to J makes β irrelevant") {
    auto a = solve_mixed(sys, J, J, 0.3).objective;
    CHECK(a == doctest::Approx(rj.objective).epsilon(1e-9));
  }
  SUBCASE("β outside [0, 1]") {
    CHECK_THROWS_AS(solve_mixed(sys, S, J, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(solve_mixed(sys, S, {}, 0.5), std::invalid_argument);
  }
}

TEST_CASE("unified model endpoints and ordering") {
  const auto sys = fixtures::c2();
  const auto S = vertex_scenarios();
  const double stoch = solve_stochastic(sys, S).objective;
  const double robust = solve_robust(sys, kSet, tight()).objective;
  auto u1 = solve_unified(sys, S, kSet, 1.0, tight());
  CHECK(u1.objective == doctest::Approx(stoch).epsilon(1e-9));
  CHECK(u1.trace.converged);
  CHECK(u1.trace.iterations <= 1);
  auto u0 = solve_unified(sys, S, kSet, 0.0, tight());
  CHECK(std::abs(u0.objective - robust) <= 1e-6);
  // With S inside the set, the expectation never exceeds the worst case.
  CHECK(stoch <= robust + 1e-6);
  double prev = robust + 1e-6;
  for (double beta : {0.25, 0.5, 0.75}) {
    auto u = solve_unified(sys, S, kSet, beta, tight());
    CHECK(u.trace.converged);
    CHECK(u.objective <= prev + 1e-6);
    CHECK(u.objective >= stoch - 1e-6);
    prev = u.objective;
  }
}

TEST_CASE("solve_model") {
  const auto sys = fixtures::c2();
  const auto base = compute_baseline(sys);
  ModelSpec spec;
  spec.set = kSet;
  spec.ccg = tight();
  spec.scenarios = sampled(5);
  SUBCASE("every kind procures at least the baseline") {
    for (auto kind : {ModelKind::deterministic, ModelKind::stochastic, ModelKind::robust, ModelKind::unified,
                      ModelKind::mixed}) {
      spec.kind = kind;
      if (kind == ModelKind::unified || kind == ModelKind::mixed) spec.beta = 0.5;
      auto sol = solve_model(sys, spec);
      CHECK(sol.kind == kind);
      CHECK(procurement_cost(sys, sol.schedule, base) >= -1e-7);
      CHECK(check_schedule(sys, sol.schedule).empty());
      CHECK(sol.schedule.system_fingerprint == sys.fingerprint());
      CHECK(sol.ccg_invoked == (kind == ModelKind::robust || kind == ModelKind::unified || kind == ModelKind::mixed));
    }
  }
  SUBCASE("deterministic reserve override") {
    spec.kind = ModelKind::deterministic;
    spec.reserve_req = std::vector<double>(4, 3.0);
    auto sol = solve_model(sys, spec);
    for (std::size_t t = 0; t < 4; ++t) CHECK(sol.schedule.total_reserve(t) >= 3.0 - 1e-7);
    CHECK(procurement_cost(sys, sol.schedule, base) >= -1e-7);
  }
  SUBCASE("mixed with a persisted J skips CCG") {
    spec.kind = ModelKind::mixed;
    spec.beta = 0.5;
    spec.robust_scenarios = vertex_scenarios();
    auto sol = solve_model(sys, spec);
    CHECK_FALSE(sol.ccg_invoked);
    CHECK_FALSE(sol.trace.has_value());
    CHECK(sol.robust_scenarios.size() == spec.robust_scenarios.size());
  }
  SUBCASE("robust agrees with the direct call") {
    spec.kind = ModelKind::robust;
    CHECK(solve_model(sys, spec).objective == doctest::Approx(solve_robust(sys, kSet, tight()).objective).epsilon(1e-9));
  }
  SUBCASE("ModelSpec validation") {
    spec.kind = ModelKind::mixed;
    CHECK_THROWS_AS(validate_spec(spec, 4), SpecError);  // β missing
    spec.beta = 2;
    CHECK_THROWS_AS(validate_spec(spec, 4), SpecError);
    spec.kind = ModelKind::stochastic;
    spec.scenarios.clear();
    CHECK_THROWS_AS(validate_spec(spec, 4), SpecError);
    spec.scenarios = sample(Distribution::uniform, 6, 3, 2, 1);
    CHECK_THROWS_AS(validate_spec(spec, 4), SpecError);
    CHECK(parse_model_kind("mixed") == ModelKind::mixed);
    CHECK(parse_model_kind("deterministic") == ModelKind::deterministic);
    CHECK_THROWS_AS(parse_model_kind("fuzzy"), SpecError);
  }
}
