#include "hydro/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "hydro/balancing.hpp"
#include "hydro/composite.hpp"
#include "hydro/csv.hpp"
#include "hydro/day_ahead.hpp"

namespace hydro {

Baseline compute_baseline(const HydroSystem& system, const lp::SolveOptions& options) {
  DayAheadConfig config;
  config.include_reserve_req = false;
  auto schedule = solve_day_ahead(system, config, options);
  return {schedule.first_stage_cost, system.fingerprint()};
}

double procurement_cost(const HydroSystem& system, const Schedule& schedule, const Baseline& baseline) {
  const auto fp = system.fingerprint();
  if (baseline.system_fingerprint != fp || schedule.system_fingerprint != fp)
    throw FingerprintMismatch("schedule, baseline and system do not describe the same system");
  return day_ahead_cost(system, schedule) - baseline.z0;
}

double balancing_cost(const HydroSystem& system, const Schedule& schedule, std::span<const double> deltas,
                      const lp::SolveOptions& options) {
  const double bal = solve_balancing(system, schedule, deltas, options).objective;
  const double pf = solve_perfect_foresight(system, deltas, options).objective;
  return bal - pf;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

template <class Fn>
void indexed(std::size_t count, unsigned threads, Fn&& fn) {
  parallel_for(count, threads, [&](std::size_t i) {
    try {
      fn(i);
    } catch (const SampleError&) {
      throw;
    } catch (const std::exception& e) {
      throw SampleError(i, e.what());
    }
  });
}

}  // namespace

SampleSet prepare_samples(const HydroSystem& system, const MonteCarloConfig& config,
                          const lp::SolveOptions& options) {
  if (config.samples == 0) throw std::invalid_argument("sample count must be at least 1");
  SampleSet set;
  set.config = config;
  const std::size_t T = system.periods();
  set.deltas.resize(config.samples);
  set.perfect_foresight.resize(config.samples);
  indexed(config.samples, config.threads, [&](std::size_t i) {
    set.deltas[i] = sample_deviation(config.dist, config.lambda_max, T, config.seed, i);
    set.perfect_foresight[i] = solve_perfect_foresight(system, set.deltas[i], options).objective;
  });
  return set;
}

Aggregates aggregate(std::span<const double> values) {
  Aggregates a;
  if (values.empty()) return a;
  const auto n = values.size();
  a.max = *std::max_element(values.begin(), values.end());
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  a.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return a;
}

CostReport evaluate_schedule(const HydroSystem& system, const Schedule& schedule, const Baseline& baseline,
                             const SampleSet& samples, const lp::SolveOptions& options) {
  CostReport report;
  report.K = procurement_cost(system, schedule, baseline);
  const std::size_t n = samples.deltas.size();
  report.B.resize(n);
  indexed(n, samples.config.threads, [&](std::size_t i) {
    report.B[i] = solve_balancing(system, schedule, samples.deltas[i], options).objective - samples.perfect_foresight[i];
  });
  report.U.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.U[i] = report.K + report.B[i];
  const auto agg = aggregate(report.U);
  report.u_max = agg.max;
  report.u_mean = agg.mean;
  report.u_median = agg.median;
  report.u_std = agg.std;
  report.samples = n;
  report.dist = samples.config.dist;
  report.seed = samples.config.seed;
  return report;
}

CostReport run_monte_carlo(const HydroSystem& system, const Schedule& schedule, const Baseline& baseline,
                           const MonteCarloConfig& config, const lp::SolveOptions& options) {
  return evaluate_schedule(system, schedule, baseline, prepare_samples(system, config, options), options);
}

std::vector<SweepRow> sweep_beta(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                                 const std::vector<NetLoadScenario>& robust, const std::vector<double>& betas,
                                 const MonteCarloConfig& config, const lp::SolveOptions& options) {
  if (betas.empty()) throw std::invalid_argument("no beta values to sweep");
  const auto baseline = compute_baseline(system, options);
  const auto samples = prepare_samples(system, config, options);
  std::vector<SweepRow> rows;
  for (double beta : betas) {
    SweepRow row;
    row.beta = beta;
    try {
      row.schedule = solve_mixed(system, scenarios, robust, beta, default_two_stage_config(), options).schedule;
      row.report = evaluate_schedule(system, row.schedule, baseline, samples, options);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> out;
  auto fail = [&] { return std::invalid_argument("cannot parse beta list '" + text + "'"); };
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ':')) parts.push_back(parse_number(item));
      if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) throw fail();
      const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      for (long i = 0; i <= n; ++i) out.push_back(std::round((parts[0] + i * parts[2]) * 1e12) / 1e12);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
    }
  } catch (const std::invalid_argument&) {
    throw fail();
  }
  if (out.empty()) throw fail();
  for (double b : out)
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("beta values must lie in [0, 1]");
  return out;
}

void write_report_csv(const std::vector<std::pair<std::string, CostReport>>& rows, const std::string& path,
                      const std::string& manifest_id) {
  CsvWriter csv(path, manifest_id);
  csv.row({"label", "K", "U_max", "U_mean", "U_median", "U_std", "samples", "dist", "seed"});
  for (const auto& [label, r] : rows)
    csv.row({label, format_number(r.K), format_number(r.u_max), format_number(r.u_mean), format_number(r.u_median),
             format_number(r.u_std), std::to_string(r.samples), to_string(r.dist), std::to_string(r.seed)});
}

void write_samples_csv(const CostReport& report, const std::string& path, const std::string& manifest_id) {
  CsvWriter csv(path, manifest_id);
  csv.row({"sample", "B", "U"});
  for (std::size_t i = 0; i < report.B.size(); ++i)
    csv.row({std::to_string(i), format_number(report.B[i]), format_number(report.U[i])});
}

}  // namespace hydro
