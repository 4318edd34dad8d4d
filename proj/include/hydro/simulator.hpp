#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "hydro/lp.hpp"
#include "hydro/system.hpp"
#include "hydro/uncertainty.hpp"

namespace hydro {

/// Z^da_0: day-ahead optimum without a reserve requirement.
struct Baseline {
  double z0 = 0.0;
  std::string system_fingerprint;
};

Baseline compute_baseline(const HydroSystem& system, const lp::SolveOptions& options = {});

class FingerprintMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// K = Z^da(x) - Z^da_0.
double procurement_cost(const HydroSystem& system, const Schedule& schedule, const Baseline& baseline);

/// B = Z^bal(x, Δ) - Z^PF(Δ).
double balancing_cost(const HydroSystem& system, const Schedule& schedule, std::span<const double> deltas,
                      const lp::SolveOptions& options = {});

struct MonteCarloConfig {
  Distribution dist = Distribution::truncated_normal;
  double lambda_max = 0.0;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Deviations and their perfect-foresight costs; independent of the
/// schedule, so one set serves a whole sweep.
struct SampleSet {
  MonteCarloConfig config;
  std::vector<std::vector<double>> deltas;
  std::vector<double> perfect_foresight;
};

SampleSet prepare_samples(const HydroSystem& system, const MonteCarloConfig& config,
                          const lp::SolveOptions& options = {});

struct CostReport {
  double K = 0.0;
  std::vector<double> B;
  std::vector<double> U;
  double u_max = 0.0;
  double u_mean = 0.0;
  double u_median = 0.0;
  double u_std = 0.0;  // n-1 denominator
  std::size_t samples = 0;
  Distribution dist = Distribution::truncated_normal;
  std::uint64_t seed = 0;
};

struct Aggregates {
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;
};

Aggregates aggregate(std::span<const double> values);

CostReport evaluate_schedule(const HydroSystem& system, const Schedule& schedule, const Baseline& baseline,
                             const SampleSet& samples, const lp::SolveOptions& options = {});

CostReport run_monte_carlo(const HydroSystem& system, const Schedule& schedule, const Baseline& baseline,
                           const MonteCarloConfig& config, const lp::SolveOptions& options = {});

/// Runs fn(i) for i in [0, count) on `threads` workers. The first failure
/// (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

class SampleError : public std::runtime_error {
 public:
  SampleError(std::size_t index, const std::string& what)
      : std::runtime_error("sample " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct SweepRow {
  double beta = 0.0;
  std::optional<CostReport> report;
  std::string error;
  Schedule schedule;
};

/// Mixed model over S and J for every β, each evaluated on the same samples.
std::vector<SweepRow> sweep_beta(const HydroSystem& system, const std::vector<NetLoadScenario>& scenarios,
                                 const std::vector<NetLoadScenario>& robust, const std::vector<double>& betas,
                                 const MonteCarloConfig& config, const lp::SolveOptions& options = {});

/// "0:1:0.1" -> {0, 0.1, ..., 1}, or a comma list "0,0.5,1".
std::vector<double> parse_betas(const std::string& text);

/// label,K,U_max,U_mean,U_median,U_std,samples,dist,seed
void write_report_csv(const std::vector<std::pair<std::string, CostReport>>& rows, const std::string& path,
                      const std::string& manifest_id = {});
/// sample,B,U
void write_samples_csv(const CostReport& report, const std::string& path, const std::string& manifest_id = {});

}  // namespace hydro
