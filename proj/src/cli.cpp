#include "hydro/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>

#include "hydro/ccg.hpp"
#include "hydro/composite.hpp"
#include "hydro/csv.hpp"
#include "hydro/simulator.hpp"
#include "hydro/system.hpp"
#include "hydro/uncertainty.hpp"

namespace hydro::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string version_string() { return std::string("hydroreserve ") + HYDRO_VERSION + " (" + lp::backend_version() + ")"; }

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string system_path;
  std::string model = "det";
  std::optional<double> beta;
  std::string scenarios_path;
  std::string robust_path;
  std::optional<double> lambda;
  std::optional<int> gamma;
  double tol = 1.0;
  int max_iter = 100;
  std::int64_t subproblem_nodes = -1;
  bool allow_unconverged = false;
  std::string reserve_req;
  std::string out_dir = ".";
  std::string config;

  // Generated scenario set S when --scenarios is absent.
  std::size_t scenario_count = 50;
  std::string scenario_dist = "normal";
  std::uint64_t scenario_seed = 1;

  // Monte Carlo.
  std::size_t samples = 1000;
  std::string dist = "normal";
  std::uint64_t seed = 2;
  unsigned threads = 0;
  std::string betas = "0:1:0.1";

  // generate-scenarios
  std::size_t count = 50;
  std::optional<std::size_t> periods;
};

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Config values become leading "--key value" arguments; later command-line
// flags win because every option takes the last occurrence.
std::vector<std::string> config_arguments(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must contain an object");
  json merged = json::object();
  for (const auto& [k, v] : cfg.items())
    if (!v.is_object()) merged[k] = v;
  if (cfg.contains(command) && cfg[command].is_object())
    for (const auto& [k, v] : cfg[command].items()) merged[k] = v;

  std::vector<std::string> args;
  for (const auto& [k, v] : merged.items()) {
    const std::string flag = "--" + k;
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back(flag);
    } else if (v.is_string()) {
      args.push_back(flag);
      args.push_back(v.get<std::string>());
    } else if (v.is_number()) {
      args.push_back(flag);
      args.push_back(v.is_number_float() ? format_number(v.get<double>()) : v.dump());
    } else if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) {
        if (!joined.empty()) joined += ',';
        joined += e.is_string() ? e.get<std::string>() : (e.is_number_float() ? format_number(e.get<double>()) : e.dump());
      }
      args.push_back(flag);
      args.push_back(joined);
    } else {
      throw UsageError("config key '" + k + "' has an unsupported value");
    }
  }
  return args;
}

HydroSystem load(const Options& o) {
  if (o.system_path.empty()) throw UsageError("--system is required");
  return load_system(o.system_path);
}

std::vector<double> reserve_vector(const std::string& text, std::size_t periods) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size()) return std::vector<double>(periods, value);
  } catch (const std::exception&) {
  }
  CsvTable table;
  try {
    table = read_csv(text);
  } catch (const std::exception& e) {
    throw UsageError("--reserve-req is neither a number nor a readable CSV: " + std::string(e.what()));
  }
  std::vector<double> out;
  try {
    const auto col = table.column("reserve_mw");
    for (const auto& row : table.rows) out.push_back(parse_number(row[col]));
  } catch (const std::exception& e) {
    throw UsageError("reserve requirement file '" + text + "': " + e.what());
  }
  if (out.size() != periods) throw UsageError("reserve requirement file must have one row per period");
  return out;
}

json hash_scenarios(const std::vector<NetLoadScenario>& set) {
  std::string text;
  for (const auto& s : set) {
    text += format_number(s.probability) + ':' + to_string(s.origin);
    for (double d : s.deltas) text += ',' + format_number(d);
    text += '\n';
  }
  return {{"count", set.size()}, {"hash", hash_text(text)}};
}

bool needs_sampled(ModelKind kind) {
  return kind == ModelKind::stochastic || kind == ModelKind::unified || kind == ModelKind::mixed;
}

struct Prepared {
  HydroSystem system;
  ModelSpec spec;
  json inputs;  // manifest inputs, no wall times or paths
  bool generated_scenarios = false;
};

Prepared prepare(const Options& o, const std::string& command) {
  Prepared p;
  p.system = load(o);
  const std::size_t T = p.system.periods();
  auto& spec = p.spec;
  try {
    spec.kind = parse_model_kind(o.model);
  } catch (const SpecError& e) {
    throw UsageError(e.what());
  }
  spec.beta = o.beta;
  if (o.lambda) spec.set.lambda_max = *o.lambda;
  if (o.gamma) spec.set.gamma = *o.gamma;
  spec.ccg.tolerance = o.tol;
  spec.ccg.max_iterations = o.max_iter;
  spec.ccg.subproblem_node_limit = o.subproblem_nodes;
  spec.ccg.allow_unconverged = o.allow_unconverged;
  if (!o.reserve_req.empty()) spec.reserve_req = reserve_vector(o.reserve_req, T);

  const bool sweep = command == "sweep";
  json s_meta = nullptr;
  if (needs_sampled(spec.kind) || sweep) {
    if (!o.scenarios_path.empty()) {
      spec.scenarios = load_scenarios(o.scenarios_path);
      s_meta = hash_scenarios(spec.scenarios);
      s_meta["source"] = "file";
    } else {
      if (!o.lambda) throw UsageError("--lambda is required to generate the scenario set (or pass --scenarios)");
      spec.scenarios = sample(parse_distribution(o.scenario_dist), *o.lambda, T, o.scenario_count, o.scenario_seed);
      p.generated_scenarios = true;
      s_meta = hash_scenarios(spec.scenarios);
      s_meta["source"] = "generated";
      s_meta["dist"] = o.scenario_dist;
      s_meta["seed"] = o.scenario_seed;
      s_meta["nested"] = "scenario i depends only on (seed, i); smaller sets are prefixes of larger ones";
    }
  }
  json j_meta = nullptr;
  if (!o.robust_path.empty()) {
    spec.robust_scenarios = load_scenarios(o.robust_path);
    j_meta = hash_scenarios(spec.robust_scenarios);
    j_meta["source"] = "file";
  }
  if ((spec.kind == ModelKind::robust || spec.kind == ModelKind::unified ||
       ((spec.kind == ModelKind::mixed || sweep) && spec.robust_scenarios.empty())) &&
      (!o.lambda || !o.gamma))
    throw UsageError("--lambda and --gamma are required for model " + o.model);
  if (sweep) {
    spec.kind = ModelKind::mixed;
    spec.beta = 1.0;  // placeholder, validated per row
  }
  try {
    validate_spec(spec, T);
  } catch (const SpecError& e) {
    throw UsageError(e.what());
  }

  json model = {{"kind", to_string(spec.kind)}};
  if (spec.beta && !sweep) model["beta"] = *spec.beta;
  if (o.lambda) model["lambda"] = *o.lambda;
  if (o.gamma) model["gamma"] = *o.gamma;
  model["reserve_req"] = spec.reserve_req ? json(*spec.reserve_req) : json("system");
  model["scenarios"] = s_meta;
  model["robust_scenarios"] = j_meta;
  p.inputs = {{"command", command},
              {"artifact", {{"name", "hydroreserve"}, {"version", HYDRO_VERSION}}},
              {"solver", lp::backend_version()},
              {"system_fingerprint", p.system.fingerprint()},
              {"model", model},
              {"tolerances",
               {{"ccg_gap_abs", o.tol},
                {"max_iterations", o.max_iter},
                {"subproblem_node_limit", o.subproblem_nodes},
                {"allow_unconverged", o.allow_unconverged},
                {"mip_abs_gap", spec.solver.mip_abs_gap},
                {"mip_rel_gap", spec.solver.mip_rel_gap},
                {"integrality", spec.solver.integrality_tolerance},
                {"primal", spec.solver.primal_tolerance},
                {"dual", spec.solver.dual_tolerance}}},
              {"rng", "mt19937_64 seeded with seed_seq(seed, index)"}};
  return p;
}

class Output {
 public:
  Output(const std::string& dir, json inputs) : dir_(dir), inputs_(std::move(inputs)) {
    fs::create_directories(dir_);
    id_ = hash_text(inputs_.dump());
  }
  const std::string& id() const { return id_; }
  std::string path(const std::string& name) {
    files_.push_back(name);
    return (dir_ / name).string();
  }
  void time(const std::string& what, double seconds) { wall_[what] = seconds; }
  json& extra() { return extra_; }
  void write_manifest() {
    json m;
    m["id"] = id_;
    for (const auto& [k, v] : inputs_.items()) m[k] = v;
    for (const auto& [k, v] : extra_.items()) m[k] = v;
    files_.push_back("manifest.json");
    m["outputs"] = files_;
    m["wall_times"] = wall_;
    std::ofstream out(dir_ / "manifest.json");
    out << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  json inputs_;
  std::string id_;
  std::vector<std::string> files_;
  json wall_ = json::object();
  json extra_ = json::object();
};

ModelSolution solve_and_write(Prepared& p, Output& out) {
  const auto start = std::chrono::steady_clock::now();
  auto sol = solve_model(p.system, p.spec);
  out.time("solve", elapsed(start));
  write_schedule_csv(p.system, sol.schedule, out.path("schedule.csv"), out.id());
  write_reserve_csv(p.system, sol.schedule, out.path("reserves.csv"), out.id());
  if (p.generated_scenarios) save_scenarios(p.spec.scenarios, out.path("scenarios.csv"), out.id());
  if (sol.ccg_invoked) save_scenarios(sol.robust_scenarios, out.path("robust_scenarios.csv"), out.id());
  if (sol.trace) {
    write_trace_csv(*sol.trace, out.path("trace.csv"), out.id());
    out.extra()["ccg"] = {{"iterations", sol.trace->iterations},
                          {"converged", sol.trace->converged},
                          {"duplicate_stop", sol.trace->duplicate_stop},
                          {"gap", sol.trace->gap}};
  }
  out.extra()["objective"] = sol.objective;
  out.extra()["first_stage_cost"] = sol.schedule.first_stage_cost;
  out.extra()["ccg_invoked"] = sol.ccg_invoked;
  return sol;
}

MonteCarloConfig mc_config(const Options& o) {
  if (!o.lambda) throw UsageError("--lambda is required for simulation");
  MonteCarloConfig c;
  c.dist = parse_distribution(o.dist);
  c.lambda_max = *o.lambda;
  c.samples = o.samples;
  c.seed = o.seed;
  c.threads = o.threads;
  if (c.samples == 0) throw UsageError("--samples must be at least 1");
  return c;
}

json mc_inputs(const Options& o) {
  return {{"samples", o.samples}, {"dist", o.dist}, {"seed", o.seed}};
}

int cmd_solve(const Options& o, std::ostream& os) {
  auto p = prepare(o, "solve");
  Output out(o.out_dir, p.inputs);
  auto sol = solve_and_write(p, out);
  out.write_manifest();
  os << "objective " << format_number(sol.objective) << "\nmanifest " << out.id() << '\n';
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& os) {
  auto p = prepare(o, "simulate");
  const auto cfg = mc_config(o);
  p.inputs["simulation"] = mc_inputs(o);
  Output out(o.out_dir, p.inputs);
  auto sol = solve_and_write(p, out);
  const auto start = std::chrono::steady_clock::now();
  const auto baseline = compute_baseline(p.system, p.spec.solver);
  auto report = run_monte_carlo(p.system, sol.schedule, baseline, cfg, p.spec.solver);
  out.time("simulate", elapsed(start));
  write_report_csv({{to_string(p.spec.kind), report}}, out.path("report.csv"), out.id());
  write_samples_csv(report, out.path("samples.csv"), out.id());
  out.extra()["baseline_z0"] = baseline.z0;
  out.write_manifest();
  os << "K " << format_number(report.K) << "\nU_mean " << format_number(report.u_mean) << "\nmanifest " << out.id()
     << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& os) {
  auto p = prepare(o, "sweep");
  const auto cfg = mc_config(o);
  const auto betas = parse_betas(o.betas);
  p.inputs["simulation"] = mc_inputs(o);
  p.inputs["betas"] = betas;
  Output out(o.out_dir, p.inputs);

  auto robust = p.spec.robust_scenarios;
  if (robust.empty()) {
    CcgOptions ccg = p.spec.ccg;
    ccg.solver = p.spec.solver;
    const auto start = std::chrono::steady_clock::now();
    auto res = solve_robust(p.system, p.spec.set, ccg);
    out.time("ccg", elapsed(start));
    require_convergence(res.trace, ccg);
    out.extra()["ccg"] = {{"iterations", res.trace.iterations},
                          {"converged", res.trace.converged},
                          {"duplicate_stop", res.trace.duplicate_stop},
                          {"gap", res.trace.gap}};
    robust = res.robust_scenarios;
    save_scenarios(robust, out.path("robust_scenarios.csv"), out.id());
    write_trace_csv(res.trace, out.path("trace.csv"), out.id());
  }
  if (p.generated_scenarios) save_scenarios(p.spec.scenarios, out.path("scenarios.csv"), out.id());

  const auto start = std::chrono::steady_clock::now();
  auto rows = sweep_beta(p.system, p.spec.scenarios, robust, betas, cfg, p.spec.solver);
  out.time("sweep", elapsed(start));
  std::vector<std::pair<std::string, CostReport>> table;
  json errors = json::array();
  for (const auto& r : rows) {
    if (r.report)
      table.emplace_back(format_number(r.beta), *r.report);
    else
      errors.push_back({{"beta", r.beta}, {"error", r.error}});
  }
  write_report_csv(table, out.path("sweep.csv"), out.id());
  out.extra()["row_errors"] = errors;
  out.write_manifest();
  for (const auto& [label, r] : table)
    os << "beta " << label << " K " << format_number(r.K) << " U_mean " << format_number(r.u_mean) << '\n';
  os << "manifest " << out.id() << '\n';
  return errors.empty() ? kExitOk : kExitSolver;
}

int cmd_generate(const Options& o, std::ostream& os) {
  std::size_t T = 0;
  std::string fingerprint;
  if (o.periods) {
    T = *o.periods;
  } else {
    auto system = load(o);
    T = system.periods();
    fingerprint = system.fingerprint();
  }
  if (!o.lambda) throw UsageError("--lambda is required");
  if (o.count == 0) throw UsageError("--count must be at least 1");
  const auto dist = parse_distribution(o.dist);
  auto set = sample(dist, *o.lambda, T, o.count, o.seed);
  json inputs = {{"command", "generate-scenarios"},
                 {"artifact", {{"name", "hydroreserve"}, {"version", HYDRO_VERSION}}},
                 {"periods", T},
                 {"lambda", *o.lambda},
                 {"count", o.count},
                 {"dist", o.dist},
                 {"seed", o.seed},
                 {"rng", "mt19937_64 seeded with seed_seq(seed, index)"}};
  if (!fingerprint.empty()) inputs["system_fingerprint"] = fingerprint;
  Output out(o.out_dir, inputs);
  save_scenarios(set, out.path("scenarios.csv"), out.id());
  out.write_manifest();
  os << set.size() << " scenarios\nmanifest " << out.id() << '\n';
  return kExitOk;
}

void add_options(CLI::App& sub, Options& o, const std::string& name) {
  const bool gen = name == "generate-scenarios";
  sub.add_option("--system", o.system_path, "System description file (JSON)");
  sub.add_option("--lambda", o.lambda, "Maximum net load deviation, MW");
  sub.add_option("--out", o.out_dir, "Output directory");
  sub.add_option("--seed", o.seed, gen ? "Seed of the generated set" : "Seed of the simulation samples");
  sub.add_option("--dist", o.dist, "normal or uniform")->check(CLI::IsMember({"normal", "uniform"}));
  sub.add_option("--threads", o.threads, "Worker threads for sample evaluation (0: all cores)");
  if (gen) {
    sub.add_option("--count", o.count, "Number of scenarios");
    sub.add_option("--periods", o.periods, "Period count when no system is given");
    return;
  }
  sub.add_option("--model", o.model, "det|stoch|robust|unified|mixed");
  sub.add_option("--beta", o.beta, "Weight of the sampled scenarios in [0, 1]");
  sub.add_option("--scenarios", o.scenarios_path, "Scenario set S (CSV)");
  sub.add_option("--robust-scenarios", o.robust_path, "Robust scenario set J (CSV)");
  sub.add_option("--gamma", o.gamma, "Budget of uncertainty");
  sub.add_option("--tol", o.tol, "Absolute CCG gap tolerance, mu");
  sub.add_option("--max-iter", o.max_iter, "CCG iteration limit");
  sub.add_option("--subproblem-nodes", o.subproblem_nodes,
                 "Node limit of the worst-case MILP; the gap is still reported from its proven bound");
  sub.add_flag("--allow-unconverged", o.allow_unconverged, "Keep the CCG result when the gap stays open");
  sub.add_option("--reserve-req", o.reserve_req, "Reserve requirement: MW for every period, or CSV with reserve_mw");
  sub.add_option("--scenario-count", o.scenario_count, "Size of a generated S");
  sub.add_option("--scenario-dist", o.scenario_dist, "Distribution of a generated S")
      ->check(CLI::IsMember({"normal", "uniform"}));
  sub.add_option("--scenario-seed", o.scenario_seed, "Seed of a generated S");
  if (name != "solve") sub.add_option("--samples", o.samples, "Monte Carlo sample count");
  if (name == "sweep") sub.add_option("--betas", o.betas, "lo:hi:step or comma list");
}

void report_error(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& os, std::ostream& err) {
  CLI::App app{"Day-ahead hydropower scheduling with reserves under net load uncertainty", "hydroreserve"};
  app.set_version_flag("--version", version_string());
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  Options o;
  std::string config_path;
  const std::vector<std::string> names{"solve", "simulate", "sweep", "generate-scenarios"};
  std::vector<CLI::App*> subs;
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON file supplying any flag; flags override it");
    add_options(*sub, o, name);
    subs.push_back(sub);
  }

  std::vector<std::string> args = args_in;
  try {
    // Splice config values in front of the explicit flags.
    if (args.size() > 1) {
      for (std::size_t i = 2; i + 1 < args.size(); ++i)
        if (args[i] == "--config") {
          auto extra = config_arguments(args[i + 1], args[1]);
          args.insert(args.begin() + 2, extra.begin(), extra.end());
          break;
        }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);  // CLI11 wants them reversed, no argv[0]
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, os, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, os, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage_error", e.what(), kExitValidation);
    return kExitValidation;
  } catch (const UsageError& e) {
    report_error(err, "usage_error", e.what(), kExitValidation);
    return kExitValidation;
  }

  try {
    if (subs[0]->parsed()) return cmd_solve(o, os);
    if (subs[1]->parsed()) return cmd_simulate(o, os);
    if (subs[2]->parsed()) return cmd_sweep(o, os);
    return cmd_generate(o, os);
  } catch (const ValidationError& e) {
    report_error(err, "validation_error", e.what(), kExitValidation);
    return kExitValidation;
  } catch (const ParseError& e) {
    report_error(err, "parse_error", e.what(), kExitValidation);
    return kExitValidation;
  } catch (const ScenarioFormatError& e) {
    report_error(err, "parse_error", e.what(), kExitValidation);
    return kExitValidation;
  } catch (const InfeasibleError& e) {
    report_error(err, "infeasible", e.what(), kExitSolver);
    return kExitSolver;
  } catch (const lp::SolverError& e) {
    report_error(err, "solver_error", e.what(), kExitSolver);
    return kExitSolver;
  } catch (const CcgError& e) {
    report_error(err, "solver_error", e.what(), kExitSolver);
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    report_error(err, "validation_error", e.what(), kExitValidation);
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error(err, "error", e.what(), kExitSolver);
    return kExitSolver;
  }
}

int run(int argc, const char* const* argv, std::ostream& os, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), os, err);
}

}  // namespace hydro::cli
