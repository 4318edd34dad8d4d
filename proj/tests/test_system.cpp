#include <doctest.h>

#include <fstream>
#include <numeric>

#include "fixtures.hpp"
#include "hydro/csv.hpp"
#include "hydro/system.hpp"

using namespace hydro;

namespace {

HydroModule simple_module(const std::string& id) {
  HydroModule m;
  m.id = id;
  m.water_value = 100;
  m.segments = {{10, 1}};
  m.max_volume = 1;
  m.initial_volume = 0.5;
  m.max_production = 10;
  m.inflow = {0};
  return m;
}

TimeGrid one_period() { return {{1}, {5}, {0}}; }

bool has_rule(const std::vector<Violation>& v, const std::string& field, const std::string& fragment) {
  for (const auto& x : v)
    if (x.field == field && x.rule.find(fragment) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("flow_to_volume") {
  CHECK(flow_to_volume(0, 1) == 0.0);
  CHECK(flow_to_volume(100, 1) == doctest::Approx(0.36).epsilon(1e-15));
  CHECK(flow_to_volume(42, 24) == doctest::Approx(3.6288).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 500);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng), h = u(rng) / 10 + 0.1, k = u(rng) / 100;
    CHECK(flow_to_volume(a + b, h) == doctest::Approx(flow_to_volume(a, h) + flow_to_volume(b, h)));
    CHECK(flow_to_volume(k * a, h) == doctest::Approx(k * flow_to_volume(a, h)));
    CHECK(flow_to_volume(a, k * h) == doctest::Approx(k * flow_to_volume(a, h)));
  }
}

TEST_CASE("validate_topology") {
  SUBCASE("single module") { CHECK(validate_topology(Topology({simple_module("a")}), one_period()).empty()); }
  SUBCASE("two-cycle") {
    auto a = simple_module("a"), b = simple_module("b");
    a.discharge_to = "b";
    b.discharge_to = "a";
    auto v = validate_topology(Topology({a, b}), one_period());
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule.find("cycle") != std::string::npos);
  }
  SUBCASE("cycle through mixed waterways") {
    auto a = simple_module("a"), b = simple_module("b"), c = simple_module("c");
    a.discharge_to = "b";
    b.bypass_to = "c";
    c.spill_to = "a";
    CHECK(has_rule(validate_topology(Topology({a, b, c}), one_period()), "modules", "cycle"));
  }
  SUBCASE("initial volume above max") {
    auto a = simple_module("a");
    a.initial_volume = 1.2 * a.max_volume;
    auto v = validate_topology(Topology({a}), one_period());
    REQUIRE(v.size() == 1);
    CHECK(v[0].module == "a");
    CHECK(v[0].field == "initial_volume");
  }
  SUBCASE("increasing efficiency") {
    auto a = simple_module("a");
    a.segments = {{5, 1}, {5, 1.5}};
    CHECK(has_rule(validate_topology(Topology({a}), one_period()), "segments[1].energy_coeff", "non-increasing"));
  }
  SUBCASE("production above turbine curve") {
    auto a = simple_module("a");
    a.max_production = 10.5;
    CHECK(has_rule(validate_topology(Topology({a}), one_period()), "max_production", "exceeds"));
  }
  SUBCASE("inflow length and unknown target") {
    auto a = simple_module("a");
    a.inflow = {1, 2};
    a.spill_to = "zzz";
    auto v = validate_topology(Topology({a}), one_period());
    CHECK(has_rule(v, "inflow", "length"));
    CHECK(has_rule(v, "spill_to", "unknown"));
  }
}

TEST_CASE("load_system") {
  SUBCASE("C1") {
    auto s = fixtures::c1();
    CHECK(s.modules() == 1);
    CHECK(s.periods() == 1);
  }
  SUBCASE("synthetic system capacity") {
    auto s = fixtures::synthetic();
    CHECK(s.modules() == 12);
    CHECK(s.periods() == 24);
    CHECK(s.topology.total_capacity() == doctest::Approx(537.4).epsilon(1e-12));
    for (const auto& m : s.topology.modules()) {
      CHECK(m.initial_volume == doctest::Approx(0.65 * m.max_volume).epsilon(1e-9));
      CHECK(m.water_value >= 1200);
      CHECK(m.water_value <= 9000);
    }
  }
  SUBCASE("missing inflow is a parse error") {
    auto text = serialize_system(fixtures::c1());
    const auto pos = text.find("\"inflow\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 8, "\"inflowX\"");
    CHECK_THROWS_AS(parse_system(text), ParseError);
  }
  SUBCASE("malformed text") { CHECK_THROWS_AS(parse_system("{\"modules\": ["), ParseError); }
  SUBCASE("validation failures are reported, not loaded") {
    auto s = fixtures::edit_modules(fixtures::c1(), [](auto& mods) { mods[0].initial_volume = 2.0; });
    const auto path = fixtures::scratch("load") / "bad.json";
    save_system(s, path.string());
    CHECK_NOTHROW(parse_system(serialize_system(s)));
    try {
      load_system(path.string());
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      REQUIRE(e.violations().size() == 1);
      CHECK(e.violations()[0].field == "initial_volume");
    }
  }
}

TEST_CASE("serialization round trip") {
  for (const auto& name : {"c1.json", "c2.json", "synthetic12.json"}) {
    auto s = load_system(fixtures::data(name));
    auto text = serialize_system(s);
    auto again = parse_system(text);
    CHECK(serialize_system(again) == text);
    CHECK(again.fingerprint() == s.fingerprint());
  }
}

TEST_CASE("upstream maps invert the downstream fields") {
  for (const auto& name : {"c2.json", "synthetic12.json"}) {
    const auto s = load_system(fixtures::data(name));
    const auto& topo = s.topology;
    for (std::size_t m = 0; m < topo.size(); ++m) {
      auto check = [&](const std::vector<std::size_t>& from, auto target_of) {
        std::vector<std::size_t> expected;
        for (std::size_t i = 0; i < topo.size(); ++i)
          if (target_of(i) == std::optional<std::size_t>(m)) expected.push_back(i);
        CHECK(from == expected);
      };
      check(topo.discharge_from(m), [&](std::size_t i) { return topo.discharge_target(i); });
      check(topo.bypass_from(m), [&](std::size_t i) { return topo.bypass_target(i); });
      check(topo.spill_from(m), [&](std::size_t i) { return topo.spill_target(i); });
    }
  }
}

TEST_CASE("csv number formatting round trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(parse_number(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-482) == "-482");
}
