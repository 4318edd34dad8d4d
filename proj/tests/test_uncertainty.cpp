#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "hydro/uncertainty.hpp"

using namespace hydro;

namespace {

double sample_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

// Std of N(0,1) clipped to [-a, a], relative to 1.
double clipped_std_closed_form(double a) {
  const double phi = std::exp(-0.5 * a * a) / std::sqrt(2 * std::numbers::pi);
  const double Phi = 0.5 * std::erfc(-a / std::sqrt(2.0));
  return std::sqrt((2 * Phi - 1) - 2 * a * phi + 2 * a * a * (1 - Phi));
}

double clipped_std_simulated(double a, int draws) {
  std::mt19937 rng(123456);  // deliberately a different engine than the library
  std::normal_distribution<double> n(0, 1);
  double s = 0, ss = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = std::clamp(n(rng), -a, a);
    s += x;
    ss += x * x;
  }
  const double mean = s / draws;
  return std::sqrt((ss - draws * mean * mean) / (draws - 1));
}

}  // namespace

TEST_CASE("contains") {
  CHECK(contains({42, 6}, std::vector<double>(24, 0.0)));
  std::vector<double> d(24, 0.0);
  for (int t = 10; t < 16; ++t) d[t] = 42;
  CHECK(contains({42, 6}, d));
  d[3] = -42;
  CHECK_FALSE(contains({42, 6}, d));
  std::vector<double> half(24, 0.0);
  half[0] = 21;
  CHECK_FALSE(contains({42, 6}, half));
}

TEST_CASE("enumerate") {
  CHECK(enumerate({5, 0}, 3).size() == 1);
  CHECK(enumerate({5, 1}, 3).size() == 7);
  CHECK(enumerate({5, 2}, 4).size() == 33);
  CHECK(vertex_count(4, 2) == 33);
  CHECK(vertex_count(24, 6) == 1 + 48 + 1104 + 16192 + 170016 + 1360128 + 8614144);
  CHECK_THROWS_AS(enumerate({42, 6}, 24), EnumerationLimitError);
  try {
    enumerate({42, 6}, 24);
  } catch (const EnumerationLimitError& e) {
    CHECK(e.count() == vertex_count(24, 6));
  }

  for (std::size_t T : {1, 3, 5}) {
    for (int gamma = 0; gamma <= static_cast<int>(T); ++gamma) {
      const UncertaintySet set{3, gamma};
      auto all = enumerate(set, T);
      // count by brute force over {-1, 0, 1}^T
      std::size_t brute = 0;
      std::set<std::vector<double>> expected;
      std::size_t total = 1;
      for (std::size_t t = 0; t < T; ++t) total *= 3;
      for (std::size_t code = 0; code < total; ++code) {
        std::vector<double> d(T);
        std::size_t c = code;
        int nz = 0;
        for (std::size_t t = 0; t < T; ++t, c /= 3) {
          d[t] = (static_cast<double>(c % 3) - 1.0) * 3;
          nz += d[t] != 0;
        }
        if (nz <= gamma) {
          ++brute;
          expected.insert(d);
        }
      }
      CHECK(all.size() == brute);
      CHECK(vertex_count(T, gamma) == brute);
      std::set<std::vector<double>> got(all.begin(), all.end());
      CHECK(got == expected);
      for (const auto& d : all) CHECK(contains(set, d));
    }
  }
}

TEST_CASE("sampling") {
  SUBCASE("support") {
    for (auto dist : {Distribution::truncated_normal, Distribution::uniform}) {
      auto one = sample(dist, 42, 24, 1, 9);
      REQUIRE(one.size() == 1);
      CHECK(one[0].probability == 1.0);
      for (double x : one[0].deltas) CHECK(std::abs(x) <= 42);
      for (const auto& s : sample(dist, 42, 24, 200, 3))
        for (double x : s.deltas) CHECK(std::abs(x) <= 42);
    }
  }
  SUBCASE("zero lambda") {
    for (const auto& s : sample(Distribution::truncated_normal, 0, 24, 5, 1))
      for (double x : s.deltas) CHECK(x == 0.0);
  }
  SUBCASE("clipped normal spread") {
    const double a = 2.5;
    const double c_sim = clipped_std_simulated(a, 1'000'000);
    CHECK(c_sim == doctest::Approx(clipped_std_closed_form(a)).epsilon(2e-3));
    auto set = sample(Distribution::truncated_normal, 42, 24, 50, 7);
    std::vector<double> all;
    for (const auto& s : set) all.insert(all.end(), s.deltas.begin(), s.deltas.end());
    const double target = 42 / 2.5 * c_sim;
    const double sd = sample_std(all);
    CHECK(sd >= 0.8 * target);
    CHECK(sd <= 1.2 * target);
    double clipped = 0;
    for (double x : all) clipped += std::abs(x) == 42;
    CHECK(clipped > 0);  // about 1.2% of 1200 draws sit on the bound
  }
  SUBCASE("uniform spread") {
    auto set = sample(Distribution::uniform, 10, 24, 200, 5);
    std::vector<double> all;
    for (const auto& s : set) all.insert(all.end(), s.deltas.begin(), s.deltas.end());
    CHECK(sample_std(all) == doctest::Approx(10 / std::sqrt(3.0)).epsilon(0.05));
  }
  SUBCASE("determinism and index independence") {
    auto a = sample(Distribution::truncated_normal, 42, 24, 50, 11);
    auto b = sample(Distribution::truncated_normal, 42, 24, 200, 11);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].deltas == b[i].deltas);
      CHECK(a[i].deltas == sample_deviation(Distribution::truncated_normal, 42, 24, 11, i));
    }
    auto c = sample(Distribution::truncated_normal, 42, 24, 50, 12);
    CHECK(a[0].deltas != c[0].deltas);
    double total = 0;
    for (const auto& s : b) total += s.probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scenario persistence") {
  const auto dir = fixtures::scratch("uncertainty");
  SUBCASE("round trip") {
    auto set = sample(Distribution::truncated_normal, 42, 24, 50, 3);
    save_scenarios(set, (dir / "s.csv").string(), "abc");
    auto back = load_scenarios((dir / "s.csv").string());
    REQUIRE(back.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      CHECK(back[i].deltas == set[i].deltas);
      CHECK(back[i].probability == set[i].probability);
      CHECK(back[i].origin == ScenarioOrigin::sampled);
    }
  }
  SUBCASE("robust tag") {
    std::vector<NetLoadScenario> j{{{42, 0, -42}, 0.5, ScenarioOrigin::robust}, {{0, 0, 0}, 0.5, ScenarioOrigin::robust}};
    save_scenarios(j, (dir / "j.csv").string());
    auto back = load_scenarios((dir / "j.csv").string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].origin == ScenarioOrigin::robust);
    CHECK(back[0].deltas == j[0].deltas);
  }
  SUBCASE("empty set") {
    save_scenarios({}, (dir / "e.csv").string());
    CHECK(load_scenarios((dir / "e.csv").string()).empty());
  }
  SUBCASE("malformed") {
    std::ofstream((dir / "bad.csv").string()) << "scenario,probability,t1\n0,abc,1\n";
    CHECK_THROWS_AS(load_scenarios((dir / "bad.csv").string()), ScenarioFormatError);
    std::ofstream((dir / "bad2.csv").string()) << "foo,bar\n1,2\n";
    CHECK_THROWS_AS(load_scenarios((dir / "bad2.csv").string()), ScenarioFormatError);
    CHECK_THROWS_AS(load_scenarios((dir / "missing.csv").string()), ScenarioFormatError);
  }
}
