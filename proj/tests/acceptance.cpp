// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixtures.hpp"
#include "hydro/balancing.hpp"
#include "hydro/ccg.hpp"
#include "hydro/cli.hpp"
#include "hydro/composite.hpp"
#include "hydro/csv.hpp"
#include "hydro/day_ahead.hpp"
#include "hydro/simulator.hpp"
#include "hydro/uncertainty.hpp"
#include "oracles.hpp"

using namespace hydro;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 1e-6;        // mu, criterion 1
constexpr double kOracleSeconds = 60.0;    // criterion 1
constexpr double kDualityRel = 1e-6;       // criterion 2, times (1 + |Z|)
constexpr double kBigMTol = 1e-6;          // criterion 3, times (1 + |Z|)
constexpr double kReductionTol = 1e-6;     // criterion 4
constexpr double kCcgTol = 1.0;            // mu, default absolute gap
constexpr double kNonnegTol = 1e-6;        // criterion 5, K and B round-off
constexpr double kPowerTol = 1e-6;         // criterion 7
constexpr double kWaterTol = 1e-9;         // criterion 7

// Criterion 6 setting.
constexpr double kLambda = 42.0;
constexpr int kGamma = 6;
constexpr std::size_t kScenarioCount = 50;
constexpr std::uint64_t kScenarioSeed = 1;
constexpr std::size_t kSamples = 1000;
constexpr std::uint64_t kSampleSeed = 2;
// The exact worst-case MILP keeps a double-digit gap after 1000 s here, so
// the subproblem stops after this many branch-and-bound nodes and CCG keeps
// the incumbent scenario. The proven gap is printed.
constexpr std::int64_t kSubproblemNodes = 200;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Schedule stamped(Schedule s, const HydroSystem& sys) {
  s.system_fingerprint = sys.fingerprint();
  return s;
}

Schedule random_schedule(const HydroSystem& sys, std::mt19937_64& rng, double max_req) {
  std::uniform_real_distribution<double> u(0, 1);
  auto copy = fixtures::edit_modules(sys, [&](auto& mods) {
    for (auto& m : mods) m.water_value *= 0.5 + u(rng);
  });
  for (auto& r : copy.grid.reserve_req) r = max_req * u(rng);
  return stamped(solve_day_ahead(copy), sys);
}

// ---------------------------------------------------------------- 1

Verdict criterion1() {
  Verdict v;
  const auto sys = fixtures::c2();
  const UncertaintySet set{6.0, 2};  // peak load 24 + 6 reaches the 30 MW fleet capacity
  const auto all = enumerate(set, sys.periods());
  v.require(all.size() == 33, "33 vectors");
  const double oracle = oracles::robust_extensive(sys, all);
  CcgOptions opts;
  opts.tolerance = 1e-7;
  const auto start = Clock::now();
  auto res = solve_robust(sys, set, opts);
  const double secs = seconds_since(start);
  const double diff = std::abs(res.objective - oracle);
  v.require(res.trace.converged, "CCG converged");
  v.require(diff <= kOracleTol, "objective within 1e-6");
  v.require(secs < kOracleSeconds, "runtime under 60 s");
  v.detail << "CCG " << fmt(res.objective) << " vs extensive " << fmt(oracle) << " over " << all.size()
           << " vectors, |diff| " << fmt(diff) << ", " << res.trace.iterations << " iterations, " << fmt(secs) << " s";
  return v;
}

// ---------------------------------------------------------------- 2

Verdict criterion2() {
  Verdict v;
  const auto sys = fixtures::c2();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    auto s = random_schedule(sys, rng, 4);
    const double lambda = 1 + 5 * u(rng);
    std::vector<double> d(sys.periods(), 0.0);
    for (auto& x : d) {
      const double r = u(rng);
      x = r < 0.35 ? lambda : (r < 0.7 ? -lambda : 0.0);
    }
    const double primal = solve_balancing(sys, s, d).objective;
    auto model = build_worst_case_milp(sys, s, lambda, static_cast<int>(sys.periods()) * 2);
    fix_deviation(model, d);
    const double dual = solve_worst_case(model).value;
    const double rel = std::abs(primal - dual) / (1 + std::abs(primal));
    worst = std::max(worst, rel);
    v.require(rel <= kDualityRel, "pair " + std::to_string(k));
  }
  v.detail << "20 pairs, max |primal - dual| / (1 + |Z|) = " << fmt(worst);
  return v;
}

// ---------------------------------------------------------------- 3

Verdict criterion3() {
  Verdict v;
  struct Instance {
    HydroSystem sys;
    Schedule schedule;
  };
  std::vector<Instance> instances;
  const auto c1 = fixtures::c1();
  instances.push_back({c1, stamped(solve_day_ahead(c1), c1)});
  const auto c2 = fixtures::c2();
  std::mt19937_64 rng(7);
  instances.push_back({c2, stamped(solve_day_ahead(c2), c2)});
  for (int k = 0; k < 4; ++k) instances.push_back({c2, random_schedule(c2, rng, 5)});

  int count = 0;
  double worst = 0;
  for (const auto& inst : instances) {
    const std::size_t T = inst.sys.periods();
    for (double lambda : {2.5, 6.0, 12.0})
      for (int gamma = 0; gamma <= static_cast<int>(std::min<std::size_t>(T, 4)); ++gamma) {
        if (vertex_count(T, gamma) > 100) continue;
        double best = -1e300;
        for (const auto& d : enumerate({lambda, gamma}, T))
          best = std::max(best, solve_balancing(inst.sys, inst.schedule, d).objective);
        auto wc = solve_worst_case(inst.sys, inst.schedule, lambda, gamma);
        const double rel = std::abs(wc.value - best) / (1 + std::abs(best));
        worst = std::max(worst, rel);
        v.require(rel <= kBigMTol, "instance " + std::to_string(count));
        ++count;
      }
  }
  v.detail << count << " instances with |L| <= 100, max relative difference " << fmt(worst);
  return v;
}

// ---------------------------------------------------------------- 4

Verdict criterion4() {
  Verdict v;
  const auto sys = fixtures::c2();
  const UncertaintySet set{6.0, 2};
  const auto S = sample(Distribution::truncated_normal, set.lambda_max, sys.periods(), 20, 11);
  CcgOptions opts;
  opts.tolerance = kCcgTol;
  auto robust = solve_robust(sys, set, opts);
  const auto& J = robust.robust_scenarios;

  const double stoch = solve_stochastic(sys, S).objective;
  const double mixed1 = solve_mixed(sys, S, J, 1.0).objective;
  const double stoch_j = solve_stochastic(sys, J).objective;
  const double mixed0 = solve_mixed(sys, S, J, 0.0).objective;
  const double unified0 = solve_unified(sys, S, set, 0.0, opts).objective;
  const double d1 = std::abs(mixed1 - stoch);
  const double d0 = std::abs(mixed0 - stoch_j);
  const double du = std::abs(unified0 - robust.objective);
  v.require(d1 <= kReductionTol, "mixed(1) = stochastic(S)");
  v.require(d0 <= kReductionTol, "mixed(0) = stochastic(J)");
  v.require(du <= kCcgTol + kReductionTol, "unified(0) = robust");
  v.detail << "|mixed(1) - stoch(S)| " << fmt(d1) << ", |mixed(0) - stoch(J)| " << fmt(d0) << ", |unified(0) - robust| "
           << fmt(du) << " (tol " << fmt(kCcgTol) << " + 1e-6)";
  return v;
}

// ---------------------------------------------------------------- 5

Verdict criterion5() {
  Verdict v;
  const auto sys = fixtures::c2();
  const auto base = compute_baseline(sys);
  ModelSpec spec;
  spec.set = {6.0, 2};
  spec.ccg.tolerance = kCcgTol;
  spec.scenarios = sample(Distribution::truncated_normal, 6.0, sys.periods(), 20, 11);
  spec.beta = 0.5;
  MonteCarloConfig mc;
  mc.lambda_max = 6.0;
  mc.samples = 1000;
  mc.seed = 5;
  const auto samples = prepare_samples(sys, mc);

  double min_k = 1e300, min_b = 1e300;
  bool exact = true;
  for (auto kind : {ModelKind::deterministic, ModelKind::stochastic, ModelKind::robust, ModelKind::unified,
                    ModelKind::mixed}) {
    spec.kind = kind;
    if (kind == ModelKind::deterministic) spec.reserve_req = std::vector<double>(sys.periods(), 3.0);
    else spec.reserve_req.reset();
    auto sol = solve_model(sys, spec);
    auto report = evaluate_schedule(sys, sol.schedule, base, samples);
    min_k = std::min(min_k, report.K);
    v.require(report.K >= -kNonnegTol, std::string("K >= 0 for ") + to_string(kind));
    for (std::size_t i = 0; i < report.B.size(); ++i) {
      min_b = std::min(min_b, report.B[i]);
      exact = exact && report.U[i] == report.K + report.B[i];
    }
    v.require(*std::min_element(report.B.begin(), report.B.end()) >= -kNonnegTol,
              std::string("B >= 0 for ") + to_string(kind));
  }
  v.require(exact, "U = K + B exactly");

  CcgOptions opts;
  opts.tolerance = kCcgTol;
  auto res = solve_robust(sys, {6.0, 2}, opts);
  bool monotone = true;
  for (std::size_t i = 1; i < res.trace.rows.size(); ++i)
    monotone = monotone && res.trace.rows[i].lower_bound >= res.trace.rows[i - 1].lower_bound - 1e-9;
  v.require(monotone, "lower bounds nondecreasing");
  v.require(res.trace.converged && res.trace.gap <= kCcgTol, "final gap within tolerance");
  v.detail << "five kinds x 1000 samples: min K " << fmt(min_k) << ", min B " << fmt(min_b)
           << ", U = K + B bitwise " << (exact ? "yes" : "no") << "; CCG " << res.trace.iterations
           << " iterations, final gap " << fmt(res.trace.gap);
  return v;
}

// ---------------------------------------------------------------- 6 and 7 share the synthetic runs

struct SyntheticRuns {
  HydroSystem sys;
  CcgResult ccg;
  double ccg_seconds = 0;
  std::vector<SweepRow> sweep;
  double sweep_seconds = 0;
  Schedule det;
  CostReport det_report;
  std::vector<Schedule> schedules;  // everything returned, for criterion 7
  std::vector<std::vector<double>> check_deltas;
};

SyntheticRuns run_synthetic() {
  SyntheticRuns r;
  r.sys = fixtures::synthetic();
  const auto& sys = r.sys;
  const auto S = sample(Distribution::truncated_normal, kLambda, sys.periods(), kScenarioCount, kScenarioSeed);

  CcgOptions opts;
  opts.tolerance = kCcgTol;
  opts.subproblem_node_limit = kSubproblemNodes;
  auto start = Clock::now();
  r.ccg = solve_robust(sys, {kLambda, kGamma}, opts);
  r.ccg_seconds = seconds_since(start);

  MonteCarloConfig mc;
  mc.lambda_max = kLambda;
  mc.samples = kSamples;
  mc.seed = kSampleSeed;
  start = Clock::now();
  r.sweep = sweep_beta(sys, S, r.ccg.robust_scenarios, parse_betas("0:1:0.1"), mc);
  r.sweep_seconds = seconds_since(start);

  r.det = stamped(solve_day_ahead(with_reserve_requirement(sys, std::vector<double>(sys.periods(), kLambda))), sys);
  r.det_report = run_monte_carlo(sys, r.det, compute_baseline(sys), mc);

  r.schedules.push_back(r.ccg.schedule);
  r.schedules.push_back(r.det);
  for (const auto& row : r.sweep)
    if (row.report) r.schedules.push_back(row.schedule);
  for (std::size_t i = 0; i < 25; ++i)
    r.check_deltas.push_back(sample_deviation(Distribution::truncated_normal, kLambda, sys.periods(), kSampleSeed, i));
  for (const auto& j : r.ccg.robust_scenarios) r.check_deltas.push_back(j.deltas);
  return r;
}

Verdict criterion6(const SyntheticRuns& r) {
  Verdict v;
  const SweepRow* b0 = nullptr;
  const SweepRow* b1 = nullptr;
  const SweepRow* best = nullptr;
  for (const auto& row : r.sweep) {
    v.require(row.report.has_value(), "sweep row beta " + fmt(row.beta) + ": " + row.error);
    if (!row.report) continue;
    if (row.beta == 0.0) b0 = &row;
    if (row.beta == 1.0) b1 = &row;
    if (!best || row.report->u_mean < best->report->u_mean) best = &row;
  }
  if (!b0 || !b1 || !best) {
    v.require(false, "sweep incomplete");
    return v;
  }
  const auto& R0 = *b0->report;
  const auto& R1 = *b1->report;
  const auto& RB = *best->report;
  v.require(R0.K > R1.K, "(a) K(beta=0) > K(beta=1)");
  v.require(R0.u_std < R1.u_std, "(b) std U(beta=0) < std U(beta=1)");
  v.require(r.det_report.u_mean > RB.u_mean, "(c) mean U det R=42 > mean U best beta");
  v.detail << "(a) K " << fmt(R0.K) << " vs " << fmt(R1.K) << "; (b) std U " << fmt(R0.u_std) << " vs "
           << fmt(R1.u_std) << "; (c) mean U det " << fmt(r.det_report.u_mean) << " vs " << fmt(RB.u_mean)
           << " at beta " << fmt(best->beta) << "; |J| " << r.ccg.robust_scenarios.size() << ", CCG "
           << r.ccg.trace.iterations << " iterations, proven gap " << fmt(r.ccg.trace.gap)
           << (r.ccg.trace.converged ? "" : " (node-limited subproblem, not certified)") << "; CCG "
           << fmt(r.ccg_seconds) << " s, sweep " << fmt(r.sweep_seconds) << " s";
  return v;
}

void print_sweep(const SyntheticRuns& r) {
  std::cout << "  beta      K         U_mean     U_median   U_std      U_max\n";
  auto line = [](const std::string& label, const CostReport& c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-8s %-9.1f %-10.1f %-10.1f %-10.1f %-10.1f\n", label.c_str(), c.K, c.u_mean,
                  c.u_median, c.u_std, c.u_max);
    std::cout << buf;
  };
  for (const auto& row : r.sweep)
    if (row.report) line(fmt(row.beta), *row.report);
  line("det R=42", r.det_report);
}

// ---------------------------------------------------------------- 7

Verdict criterion7(const SyntheticRuns& r) {
  Verdict v;
  ScheduleTolerance tol;
  tol.power = kPowerTol;
  tol.water = kWaterTol;
  std::size_t schedules = 0, outcomes = 0;

  auto check_schedule_set = [&](const HydroSystem& sys, const std::vector<Schedule>& list,
                                const std::vector<std::vector<double>>& deltas) {
    for (const auto& s : list) {
      ++schedules;
      auto issues = check_schedule(sys, s, tol);
      v.require(issues.empty(), "schedule: " + (issues.empty() ? std::string() : issues.front()));
      for (const auto& d : deltas) {
        ++outcomes;
        auto out = solve_balancing(sys, s, d);
        auto bad = check_outcome(sys, &s, d, out, tol);
        v.require(bad.empty(), "balancing: " + (bad.empty() ? std::string() : bad.front()));
      }
    }
    for (const auto& d : deltas) {
      ++outcomes;
      auto pf = solve_perfect_foresight(sys, d);
      auto bad = check_outcome(sys, nullptr, d, pf, tol);
      v.require(bad.empty(), "perfect foresight: " + (bad.empty() ? std::string() : bad.front()));
    }
  };

  // Small fixtures: every model kind plus its extensive-form outcomes.
  const auto c2 = fixtures::c2();
  ModelSpec spec;
  spec.set = {6.0, 2};
  spec.scenarios = sample(Distribution::truncated_normal, 6.0, c2.periods(), 20, 11);
  spec.beta = 0.5;
  std::vector<Schedule> c2_list;
  for (auto kind : {ModelKind::deterministic, ModelKind::stochastic, ModelKind::robust, ModelKind::unified,
                    ModelKind::mixed}) {
    spec.kind = kind;
    c2_list.push_back(solve_model(c2, spec).schedule);
  }
  std::vector<std::vector<double>> c2_deltas;
  for (const auto& s : spec.scenarios) c2_deltas.push_back(s.deltas);
  check_schedule_set(c2, c2_list, c2_deltas);
  auto ext = solve_stochastic(c2, spec.scenarios);
  for (std::size_t k = 0; k < ext.outcomes.size(); ++k) {
    ++outcomes;
    auto bad = check_outcome(c2, &ext.schedule, spec.scenarios[k].deltas, ext.outcomes[k], tol);
    v.require(bad.empty(), "extensive block: " + (bad.empty() ? std::string() : bad.front()));
  }

  check_schedule_set(r.sys, r.schedules, r.check_deltas);
  v.detail << schedules << " schedules and " << outcomes << " balancing outcomes checked (water " << fmt(kWaterTol)
           << " Mm3, power " << fmt(kPowerTol) << " MW)";
  return v;
}

// ---------------------------------------------------------------- 8

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// trace.csv carries per-iteration wall time; that column is dropped.
std::string without_seconds(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, out;
  std::optional<std::size_t> column;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!column && !fields.empty() && fields[0] == "iteration")
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == "seconds") column = i;
    if (column && *column < fields.size() && line[0] != '#') fields.erase(fields.begin() + *column);
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
    out += '\n';
  }
  return out;
}

bool same_outputs(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names.insert(e.path().filename().string());
  for (const auto& n : names) {
    if (!fs::exists(a / n) || !fs::exists(b / n)) {
      why = n + " missing";
      return false;
    }
    if (n == "manifest.json") {
      auto ja = nlohmann::json::parse(slurp(a / n));
      auto jb = nlohmann::json::parse(slurp(b / n));
      ja.erase("wall_times");
      jb.erase("wall_times");
      if (ja != jb) {
        why = n;
        return false;
      }
    } else if (n == "trace.csv") {
      if (without_seconds(a / n) != without_seconds(b / n)) {
        why = n;
        return false;
      }
    } else if (slurp(a / n) != slurp(b / n)) {
      why = n;
      return false;
    }
  }
  return true;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hydroreserve");
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

Verdict criterion8(const SyntheticRuns& r) {
  Verdict v;
  const auto dir = fixtures::scratch("acceptance_determinism");
  const std::string c2 = fixtures::data("c2.json");
  const std::vector<std::string> solve{"solve", "--system", c2, "--model", "mixed", "--beta", "0.4", "--lambda", "6",
                                       "--gamma", "2", "--scenario-count", "20"};
  const std::vector<std::string> simulate{"simulate", "--system", c2, "--model", "unified", "--beta", "0.7",
                                          "--lambda", "6", "--gamma", "2", "--samples", "300"};
  const std::vector<std::string> sweep{"sweep", "--system", c2, "--lambda", "6", "--gamma", "2",
                                       "--samples", "100", "--betas", "0:1:0.25"};
  int runs = 0;
  for (const auto& [name, args] : {std::pair{"solve", solve}, std::pair{"simulate", simulate}, std::pair{"sweep", sweep}}) {
    std::vector<fs::path> outs;
    for (const char* threads : {"1", "3"}) {
      auto a = args;
      const auto out = dir / (std::string(name) + threads);
      a.insert(a.end(), {"--out", out.string()});
      if (std::string(name) != "solve") a.insert(a.end(), {"--threads", threads});
      const int code = run_cli(a);
      v.require(code == 0, std::string(name) + " exit code " + std::to_string(code));
      outs.push_back(out);
      ++runs;
    }
    std::string why;
    v.require(same_outputs(outs[0], outs[1], why), std::string(name) + " outputs differ: " + why);
  }

  // Sequential versus parallel evaluation on the synthetic system.
  MonteCarloConfig mc;
  mc.lambda_max = kLambda;
  mc.samples = 200;
  mc.seed = kSampleSeed;
  const auto base = compute_baseline(r.sys);
  mc.threads = 1;
  auto seq = run_monte_carlo(r.sys, r.det, base, mc);
  mc.threads = 4;
  auto par = run_monte_carlo(r.sys, r.det, base, mc);
  v.require(seq.U == par.U && seq.B == par.B, "parallel and sequential Monte Carlo agree");
  v.detail << runs << " CLI runs in identical pairs (byte-identical CSVs, trace seconds column excluded); "
           << "200 synthetic samples identical on 1 and 4 threads";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int n) { return only.empty() || only.count(n) > 0; };

  const char* titles[] = {"",
                          "robust oracle equivalence",
                          "strong duality at fixed binaries",
                          "big-M exactness",
                          "model reductions",
                          "cost identities",
                          "trend reproduction on the synthetic system",
                          "water and power feasibility",
                          "determinism"};
  int failures = 0;
  auto report = [&](int n, const std::function<Verdict()>& fn) {
    if (!wanted(n)) return;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    if (!v.pass) ++failures;
    std::cout << "CRITERION " << n << ' ' << (v.pass ? "PASS" : "FAIL") << ": " << titles[n] << ": "
              << v.detail.str() << " (" << fmt(seconds_since(start)) << " s)" << std::endl;
  };

  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, criterion4);
  report(5, criterion5);

  if (wanted(6) || wanted(7) || wanted(8)) {
    std::optional<SyntheticRuns> runs;
    std::string error;
    const auto start = Clock::now();
    try {
      runs = run_synthetic();
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::cout << "synthetic runs: " << fmt(seconds_since(start)) << " s" << std::endl;
    auto need = [&](const std::function<Verdict(const SyntheticRuns&)>& fn) {
      return [&, fn]() -> Verdict {
        if (!runs) throw std::runtime_error("synthetic runs failed: " + error);
        return fn(*runs);
      };
    };
    report(6, need(criterion6));
    if (runs && wanted(6)) print_sweep(*runs);
    report(7, need(criterion7));
    report(8, need(criterion8));
  }
  return failures == 0 ? 0 : 1;
}
