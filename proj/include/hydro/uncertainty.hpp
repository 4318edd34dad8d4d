#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydro {

/// Budgeted deviation set: Δ_t = Λ(u+_t - u-_t), at most Γ nonzero periods.
struct UncertaintySet {
  double lambda_max = 0.0;
  int gamma = 0;
};

enum class ScenarioOrigin { sampled, robust, manual };

const char* to_string(ScenarioOrigin origin);
ScenarioOrigin parse_origin(const std::string& text);

struct NetLoadScenario {
  std::vector<double> deltas;  // MW per period
  double probability = 0.0;
  ScenarioOrigin origin = ScenarioOrigin::manual;
};

bool contains(const UncertaintySet& set, std::span<const double> deltas);

/// sum_{k=0..Γ} C(T,k) 2^k, saturating at UINT64_MAX.
std::uint64_t vertex_count(std::size_t periods, int gamma);

inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

class EnumerationLimitError : public std::runtime_error {
 public:
  explicit EnumerationLimitError(std::uint64_t count)
      : std::runtime_error("uncertainty set has " + std::to_string(count) + " vertices, above the limit of " +
                           std::to_string(kEnumerationLimit)),
        count_(count) {}
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_;
};

/// All vertices of the set for T periods, ordered by number of nonzero
/// entries, then lexicographically by position, with +Λ before -Λ.
std::vector<std::vector<double>> enumerate(const UncertaintySet& set, std::size_t periods);

enum class Distribution { truncated_normal, uniform };

const char* to_string(Distribution dist);
Distribution parse_distribution(const std::string& text);  // "normal" | "uniform"

/// Deviation vector i of a sampled stream. Depends only on (seed, i), so
/// any subset can be drawn in any order. Normal draws have σ = Λ/2.5 and
/// are clipped to [-Λ, Λ].
std::vector<double> sample_deviation(Distribution dist, double lambda_max, std::size_t periods, std::uint64_t seed,
                                     std::uint64_t index);

/// `count` equiprobable scenarios: indices 0..count-1 of the stream above.
std::vector<NetLoadScenario> sample(Distribution dist, double lambda_max, std::size_t periods, std::size_t count,
                                    std::uint64_t seed);

/// Equal probabilities 1/|set|, origin unchanged.
void equalize(std::vector<NetLoadScenario>& scenarios);

class ScenarioFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV header: scenario,probability,origin,t1..tT.
void save_scenarios(const std::vector<NetLoadScenario>& scenarios, const std::string& path,
                    const std::string& manifest_id = {});
std::vector<NetLoadScenario> load_scenarios(const std::string& path);

}  // namespace hydro
