#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydro {

/// Mm³ per (m³/s · h): 3600 s / 10⁶ m³.
inline constexpr double kFlowToVolume = 0.0036;

/// Volume moved by a constant flow over a period.
/// Flow in m³/s, duration in hours, result in Mm³.
constexpr double flow_to_volume(double flow, double hours) { return flow * hours * kFlowToVolume; }

struct DischargeSegment {
  double max_discharge = 0.0;  // m³/s
  double energy_coeff = 0.0;   // MW per m³/s
};

/// One reservoir with its plant and gates. Absent downstream ids mean the
/// water leaves the system.
struct HydroModule {
  std::string id;
  double water_value = 0.0;  // mu/Mm³
  std::vector<DischargeSegment> segments;
  double max_bypass = 0.0;      // m³/s
  double max_spill = 0.0;       // m³/s
  double max_volume = 0.0;      // Mm³
  double initial_volume = 0.0;  // Mm³
  double max_production = 0.0;  // MW
  std::optional<std::string> discharge_to;
  std::optional<std::string> bypass_to;
  std::optional<std::string> spill_to;
  std::vector<double> inflow;  // m³/s per period

  double turbine_capacity() const;
};

/// Modules plus the derived waterway index. Upstream lists are the exact
/// inverse of the *_to fields; unresolved ids are left out of the index and
/// reported by validate_topology.
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::vector<HydroModule> modules);

  const std::vector<HydroModule>& modules() const { return modules_; }
  std::size_t size() const { return modules_.size(); }
  const HydroModule& operator[](std::size_t m) const { return modules_[m]; }
  std::optional<std::size_t> index_of(const std::string& id) const;

  const std::vector<std::size_t>& discharge_from(std::size_t m) const { return discharge_from_[m]; }
  const std::vector<std::size_t>& bypass_from(std::size_t m) const { return bypass_from_[m]; }
  const std::vector<std::size_t>& spill_from(std::size_t m) const { return spill_from_[m]; }

  std::optional<std::size_t> discharge_target(std::size_t m) const { return discharge_to_[m]; }
  std::optional<std::size_t> bypass_target(std::size_t m) const { return bypass_to_[m]; }
  std::optional<std::size_t> spill_target(std::size_t m) const { return spill_to_[m]; }

  double total_capacity() const;

 private:
  std::vector<HydroModule> modules_;
  std::vector<std::optional<std::size_t>> discharge_to_, bypass_to_, spill_to_;
  std::vector<std::vector<std::size_t>> discharge_from_, bypass_from_, spill_from_;
};

struct TimeGrid {
  std::vector<double> period_hours;  // h
  std::vector<double> net_load;      // MW
  std::vector<double> reserve_req;   // MW

  std::size_t periods() const { return period_hours.size(); }
};

struct CostParams {
  double load_shed = 0.0;        // mu/MW
  double power_spill = 0.0;      // mu/MW
  double bypass_penalty = 0.0;   // mu per (m³/s · h)
  double spill_penalty = 0.0;    // mu per (m³/s · h)
  double reserve_epsilon = 1e-4; // mu/MW, tie-breaker only, never reported
};

/// 64-bit FNV-1a of `text` as 16 hex digits.
std::string hash_text(const std::string& text);

struct HydroSystem {
  Topology topology;
  TimeGrid grid;
  CostParams costs;

  std::size_t modules() const { return topology.size(); }
  std::size_t periods() const { return grid.periods(); }
  /// Stable fingerprint of the canonical serialization.
  std::string fingerprint() const;
};

struct Violation {
  std::string module;  // empty for grid/cost level rules
  std::string field;
  std::string rule;

  std::string to_string() const;
};

std::vector<Violation> validate_topology(const Topology& topology, const TimeGrid& grid);
std::vector<Violation> validate_system(const HydroSystem& system);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

HydroSystem parse_system(const std::string& text);
HydroSystem load_system(const std::string& path);
std::string serialize_system(const HydroSystem& system);
void save_system(const HydroSystem& system, const std::string& path);

/// First-stage decisions. Matrices are indexed [module][period]; volumes
/// carry periods + 1 entries (index 0 is the initial volume).
struct Schedule {
  std::vector<std::vector<double>> production;
  std::vector<std::vector<double>> reserve;
  std::vector<std::vector<std::vector<double>>> segment_discharge;  // [m][n][t]
  std::vector<std::vector<double>> bypass;
  std::vector<std::vector<double>> spill;
  std::vector<std::vector<double>> flow_in;
  std::vector<std::vector<double>> flow_out;
  std::vector<std::vector<double>> volume;
  double first_stage_cost = 0.0;  // Z^da, reserve tie-breaker excluded
  std::string system_fingerprint;

  double total_reserve(std::size_t t) const;
};

struct ScheduleTolerance {
  double power = 1e-6;  // MW, power balance, reserve box, bounds
  double water = 1e-9;  // Mm³, mass balance residual
};

/// Invariant violations of a schedule against its system (power balance,
/// reserve box, water balance, bounds). Empty means valid.
std::vector<std::string> check_schedule(const HydroSystem& system, const Schedule& schedule,
                                        ScheduleTolerance tolerance = {});

void write_schedule_csv(const HydroSystem& system, const Schedule& schedule, const std::string& path,
                        const std::string& manifest_id = {});
void write_reserve_csv(const HydroSystem& system, const Schedule& schedule, const std::string& path,
                       const std::string& manifest_id = {});

}  // namespace hydro
