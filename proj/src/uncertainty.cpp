#include "hydro/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hydro/csv.hpp"

namespace hydro {

const char* to_string(ScenarioOrigin origin) {
  switch (origin) {
    case ScenarioOrigin::sampled:
      return "sampled";
    case ScenarioOrigin::robust:
      return "robust";
    case ScenarioOrigin::manual:
      return "manual";
  }
  return "manual";
}

ScenarioOrigin parse_origin(const std::string& text) {
  if (text == "sampled") return ScenarioOrigin::sampled;
  if (text == "robust") return ScenarioOrigin::robust;
  if (text == "manual") return ScenarioOrigin::manual;
  throw ScenarioFormatError("unknown scenario origin '" + text + "'");
}

bool contains(const UncertaintySet& set, std::span<const double> deltas) {
  int nonzero = 0;
  for (double d : deltas) {
    if (d == 0.0) continue;
    if (d != set.lambda_max && d != -set.lambda_max) return false;
    ++nonzero;
  }
  return nonzero <= set.gamma;
}

std::uint64_t vertex_count(std::size_t periods, int gamma) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const std::size_t kmax = std::min<std::size_t>(periods, gamma < 0 ? 0 : static_cast<std::size_t>(gamma));
  std::uint64_t total = 0;
  long double binom = 1.0L;  // C(T,k), kept in long double to detect overflow
  long double pow2 = 1.0L;
  for (std::size_t k = 0; k <= kmax; ++k) {
    if (k > 0) {
      binom = binom * static_cast<long double>(periods - k + 1) / static_cast<long double>(k);
      pow2 *= 2.0L;
    }
    const long double term = std::round(binom * pow2);
    if (term >= static_cast<long double>(kMax) || static_cast<long double>(total) + term >= static_cast<long double>(kMax))
      return kMax;
    total += static_cast<std::uint64_t>(term);
  }
  return total;
}

namespace {

void enumerate_level(std::size_t periods, std::size_t k, double lambda, std::vector<std::size_t>& positions,
                     std::size_t next, std::vector<std::vector<double>>& out) {
  if (positions.size() == k) {
    for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << k); ++signs) {
      std::vector<double> d(periods, 0.0);
      for (std::size_t i = 0; i < k; ++i) d[positions[i]] = ((signs >> (k - 1 - i)) & 1U) ? -lambda : lambda;
      out.push_back(std::move(d));
    }
    return;
  }
  for (std::size_t p = next; p + (k - positions.size()) <= periods; ++p) {
    positions.push_back(p);
    enumerate_level(periods, k, lambda, positions, p + 1, out);
    positions.pop_back();
  }
}

}  // namespace

std::vector<std::vector<double>> enumerate(const UncertaintySet& set, std::size_t periods) {
  const auto count = vertex_count(periods, set.gamma);
  if (count > kEnumerationLimit) throw EnumerationLimitError(count);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  const std::size_t kmax = std::min<std::size_t>(periods, static_cast<std::size_t>(std::max(set.gamma, 0)));
  std::vector<std::size_t> positions;
  for (std::size_t k = 0; k <= kmax; ++k) enumerate_level(periods, k, set.lambda_max, positions, 0, out);
  if (set.lambda_max == 0.0) out.resize(1);  // all vertices coincide
  return out;
}

const char* to_string(Distribution dist) {
  return dist == Distribution::uniform ? "uniform" : "normal";
}

Distribution parse_distribution(const std::string& text) {
  if (text == "normal" || text == "truncated_normal") return Distribution::truncated_normal;
  if (text == "uniform") return Distribution::uniform;
  throw std::invalid_argument("unknown distribution '" + text + "' (expected normal or uniform)");
}

std::vector<double> sample_deviation(Distribution dist, double lambda_max, std::size_t periods, std::uint64_t seed,
                                     std::uint64_t index) {
  std::vector<double> d(periods, 0.0);
  if (lambda_max == 0.0) return d;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  if (dist == Distribution::uniform) {
    std::uniform_real_distribution<double> u(-lambda_max, lambda_max);
    for (auto& x : d) x = u(rng);
  } else {
    std::normal_distribution<double> n(0.0, lambda_max / 2.5);
    for (auto& x : d) x = std::clamp(n(rng), -lambda_max, lambda_max);
  }
  return d;
}

std::vector<NetLoadScenario> sample(Distribution dist, double lambda_max, std::size_t periods, std::size_t count,
                                    std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample count must be at least 1");
  std::vector<NetLoadScenario> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].deltas = sample_deviation(dist, lambda_max, periods, seed, i);
    out[i].probability = 1.0 / static_cast<double>(count);
    out[i].origin = ScenarioOrigin::sampled;
  }
  return out;
}

void equalize(std::vector<NetLoadScenario>& scenarios) {
  for (auto& s : scenarios) s.probability = 1.0 / static_cast<double>(scenarios.size());
}

void save_scenarios(const std::vector<NetLoadScenario>& scenarios, const std::string& path,
                    const std::string& manifest_id) {
  const std::size_t T = scenarios.empty() ? 0 : scenarios.front().deltas.size();
  CsvWriter csv(path, manifest_id);
  std::vector<std::string> header{"scenario", "probability", "origin"};
  for (std::size_t t = 0; t < T; ++t) header.push_back("t" + std::to_string(t + 1));
  csv.row(header);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& s = scenarios[i];
    if (s.deltas.size() != T) throw std::invalid_argument("scenarios have different lengths");
    std::vector<std::string> row{std::to_string(i), format_number(s.probability), to_string(s.origin)};
    for (double d : s.deltas) row.push_back(format_number(d));
    csv.row(row);
  }
}

std::vector<NetLoadScenario> load_scenarios(const std::string& path) {
  CsvTable table;
  try {
    table = read_csv(path);
  } catch (const std::exception& e) {
    throw ScenarioFormatError(e.what());
  }
  const auto& h = table.header;
  if (h.size() < 2 || h[0] != "scenario" || h[1] != "probability")
    throw ScenarioFormatError(path + ": header must start with scenario,probability");
  std::size_t first = 2;
  const bool has_origin = h.size() > 2 && h[2] == "origin";
  if (has_origin) first = 3;
  for (std::size_t c = first; c < h.size(); ++c)
    if (h[c] != "t" + std::to_string(c - first + 1))
      throw ScenarioFormatError(path + ": unexpected column '" + h[c] + "'");

  std::vector<NetLoadScenario> out;
  for (const auto& row : table.rows) {
    NetLoadScenario s;
    try {
      s.probability = parse_number(row[1]);
      for (std::size_t c = first; c < row.size(); ++c) s.deltas.push_back(parse_number(row[c]));
    } catch (const std::exception& e) {
      throw ScenarioFormatError(path + ": " + e.what());
    }
    s.origin = has_origin ? parse_origin(row[2]) : ScenarioOrigin::manual;
    if (!(s.probability >= 0.0)) throw ScenarioFormatError(path + ": negative probability");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hydro
