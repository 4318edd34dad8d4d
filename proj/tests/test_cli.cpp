#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "hydro/cli.hpp"
#include "hydro/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hydroreserve");
  std::ostringstream out, err;
  const int code = hydro::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

const std::string kC2 = fixtures::data("c2.json");

}  // namespace

TEST_CASE("version") {
  auto r = cli({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find(hydro::cli::version_string()) != std::string::npos);
  // The installed binary answers the same way.
  const std::string cmd = std::string(HYDRO_CLI_PATH) + " --version";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[256] = {};
  std::string text;
  while (fgets(buf, sizeof buf, pipe)) text += buf;
  CHECK(pclose(pipe) == 0);
  CHECK(text.find("hydroreserve") != std::string::npos);
}

TEST_CASE("generate-scenarios") {
  const auto dir = fixtures::scratch("cli_gen");
  auto r = cli({"generate-scenarios", "--system", kC2, "--lambda", "6", "--count", "50", "--out", (dir / "a").string()});
  REQUIRE(r.code == 0);
  auto table = hydro::read_csv((dir / "a" / "scenarios.csv").string());
  CHECK(table.rows.size() == 50);
  CHECK(table.header.size() == 3 + 4);
  auto m = manifest(dir / "a");
  CHECK(m["id"].is_string());
  CHECK(slurp(dir / "a" / "scenarios.csv").rfind("# manifest: " + m["id"].get<std::string>(), 0) == 0);

  SUBCASE("reruns are identical") {
    REQUIRE(cli({"generate-scenarios", "--system", kC2, "--lambda", "6", "--count", "50", "--out", (dir / "b").string()})
                .code == 0);
    CHECK(slurp(dir / "a" / "scenarios.csv") == slurp(dir / "b" / "scenarios.csv"));
    CHECK(manifest(dir / "b")["id"] == m["id"]);
  }
  SUBCASE("config file with an overriding flag") {
    std::ofstream(dir / "cfg.json") << R"({"lambda": 6, "count": 5, "seed": 2})";
    auto c = cli({"generate-scenarios", "--system", kC2, "--config", (dir / "cfg.json").string(), "--count", "7",
                  "--out", (dir / "c").string()});
    REQUIRE(c.code == 0);
    CHECK(hydro::read_csv((dir / "c" / "scenarios.csv").string()).rows.size() == 7);
  }
}

TEST_CASE("solve") {
  const auto dir = fixtures::scratch("cli_solve");
  SUBCASE("deterministic with a reserve requirement") {
    auto r = cli({"solve", "--system", kC2, "--model", "det", "--reserve-req", "3", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "schedule.csv"));
    CHECK(fs::exists(dir / "reserves.csv"));
    CHECK_FALSE(fs::exists(dir / "trace.csv"));
    CHECK(manifest(dir)["model"]["reserve_req"] == json({3.0, 3.0, 3.0, 3.0}));
  }
  SUBCASE("mixed requires beta") {
    auto r = cli({"solve", "--system", kC2, "--model", "mixed", "--lambda", "6", "--gamma", "2", "--out", dir.string()});
    CHECK(r.code == hydro::cli::kExitValidation);
    auto e = json::parse(r.err);
    CHECK(e["exit_code"] == 2);
    CHECK(e["message"].get<std::string>().find("beta") != std::string::npos);
  }
  SUBCASE("robust, then mixed on the persisted set") {
    auto rob = cli({"solve", "--system", kC2, "--model", "robust", "--lambda", "6", "--gamma", "2", "--out",
                    (dir / "r").string()});
    REQUIRE(rob.code == 0);
    CHECK(fs::exists(dir / "r" / "trace.csv"));
    REQUIRE(fs::exists(dir / "r" / "robust_scenarios.csv"));
    auto mix = cli({"solve", "--system", kC2, "--model", "mixed", "--beta", "0.5", "--lambda", "6",
                    "--scenario-count", "10", "--robust-scenarios", (dir / "r" / "robust_scenarios.csv").string(),
                    "--out", (dir / "m").string()});
    REQUIRE(mix.code == 0);
    CHECK_FALSE(fs::exists(dir / "m" / "trace.csv"));
    CHECK(fs::exists(dir / "m" / "scenarios.csv"));
  }
  SUBCASE("infeasible requirement") {
    auto r = cli({"solve", "--system", kC2, "--model", "det", "--reserve-req", "1000", "--out", dir.string()});
    CHECK(r.code == hydro::cli::kExitSolver);
    CHECK(json::parse(r.err)["error"] == "infeasible");
  }
  SUBCASE("bad inputs") {
    auto missing = cli({"solve", "--system", (dir / "nope.json").string(), "--out", dir.string()});
    CHECK(missing.code == hydro::cli::kExitValidation);
    CHECK_NOTHROW(json::parse(missing.err));
    auto unknown = cli({"solve", "--system", kC2, "--model", "fuzzy", "--out", dir.string()});
    CHECK(unknown.code == hydro::cli::kExitValidation);
    auto flag = cli({"solve", "--bogus"});
    CHECK(flag.code == hydro::cli::kExitValidation);
  }
}

TEST_CASE("simulate and sweep") {
  const auto dir = fixtures::scratch("cli_sim");
  auto r = cli({"simulate", "--system", kC2, "--model", "det", "--reserve-req", "2", "--lambda", "6", "--samples", "20",
                "--out", (dir / "s").string()});
  REQUIRE(r.code == 0);
  auto report = hydro::read_csv((dir / "s" / "report.csv").string());
  REQUIRE(report.rows.size() == 1);
  CHECK(hydro::read_csv((dir / "s" / "samples.csv").string()).rows.size() == 20);

  auto again = cli({"simulate", "--system", kC2, "--model", "det", "--reserve-req", "2", "--lambda", "6", "--samples",
                    "20", "--threads", "3", "--out", (dir / "t").string()});
  REQUIRE(again.code == 0);
  CHECK(hydro::read_csv((dir / "s" / "samples.csv").string()).rows ==
        hydro::read_csv((dir / "t" / "samples.csv").string()).rows);

  auto sw = cli({"sweep", "--system", kC2, "--lambda", "6", "--gamma", "2", "--scenario-count", "6", "--samples", "10",
                 "--betas", "0,0.5,1", "--out", (dir / "w").string()});
  REQUIRE(sw.code == 0);
  CHECK(hydro::read_csv((dir / "w" / "sweep.csv").string()).rows.size() == 3);
  CHECK(fs::exists(dir / "w" / "trace.csv"));
}
