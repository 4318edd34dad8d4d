#include "hydro/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hydro/csv.hpp"
#include "json.hpp"

namespace hydro {

using ordered_json = nlohmann::ordered_json;

double HydroModule::turbine_capacity() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.max_discharge * s.energy_coeff;
  return total;
}

Topology::Topology(std::vector<HydroModule> modules) : modules_(std::move(modules)) {
  const std::size_t n = modules_.size();
  discharge_to_.assign(n, std::nullopt);
  bypass_to_.assign(n, std::nullopt);
  spill_to_.assign(n, std::nullopt);
  discharge_from_.assign(n, {});
  bypass_from_.assign(n, {});
  spill_from_.assign(n, {});
  for (std::size_t m = 0; m < n; ++m) {
    const auto& mod = modules_[m];
    auto link = [&](const std::optional<std::string>& target, std::optional<std::size_t>& out,
                    std::vector<std::vector<std::size_t>>& from) {
      if (!target) return;
      if (auto idx = index_of(*target)) {
        out = *idx;
        from[*idx].push_back(m);
      }
    };
    link(mod.discharge_to, discharge_to_[m], discharge_from_);
    link(mod.bypass_to, bypass_to_[m], bypass_from_);
    link(mod.spill_to, spill_to_[m], spill_from_);
  }
}

std::optional<std::size_t> Topology::index_of(const std::string& id) const {
  for (std::size_t m = 0; m < modules_.size(); ++m)
    if (modules_[m].id == id) return m;
  return std::nullopt;
}

double Topology::total_capacity() const {
  double total = 0.0;
  for (const auto& m : modules_) total += m.max_production;
  return total;
}

double Schedule::total_reserve(std::size_t t) const {
  double total = 0.0;
  for (const auto& row : reserve) total += row[t];
  return total;
}

std::string Violation::to_string() const {
  std::string out = module.empty() ? std::string("<system>") : module;
  out += ".";
  out += field;
  out += ": ";
  out += rule;
  return out;
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string msg = "system validation failed:";
  for (const auto& v : violations) msg += "\n  " + v.to_string();
  return msg;
}

bool has_cycle(const Topology& topology) {
  const std::size_t n = topology.size();
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(n, 0);
  std::function<bool(std::size_t)> visit = [&](std::size_t m) {
    state[m] = 1;
    for (auto next : {topology.discharge_target(m), topology.bypass_target(m), topology.spill_target(m)}) {
      if (!next) continue;
      if (state[*next] == 1) return true;
      if (state[*next] == 0 && visit(*next)) return true;
    }
    state[m] = 2;
    return false;
  };
  for (std::size_t m = 0; m < n; ++m)
    if (state[m] == 0 && visit(m)) return true;
  return false;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validate_topology(const Topology& topology, const TimeGrid& grid) {
  std::vector<Violation> out;
  const std::size_t T = grid.periods();

  if (T == 0) out.push_back({"", "time_grid.period_hours", "at least one period required"});
  if (grid.net_load.size() != T)
    out.push_back({"", "time_grid.net_load", "length must equal period count"});
  if (grid.reserve_req.size() != T)
    out.push_back({"", "time_grid.reserve_req", "length must equal period count"});
  for (double h : grid.period_hours)
    if (!(h > 0.0)) {
      out.push_back({"", "time_grid.period_hours", "durations must be > 0"});
      break;
    }
  for (double r : grid.reserve_req)
    if (!(r >= 0.0)) {
      out.push_back({"", "time_grid.reserve_req", "requirements must be >= 0"});
      break;
    }

  if (topology.size() == 0) out.push_back({"", "modules", "at least one module required"});

  std::unordered_set<std::string> seen;
  for (const auto& mod : topology.modules()) {
    const auto& id = mod.id;
    if (id.empty()) out.push_back({id, "id", "must be non-empty"});
    if (!seen.insert(id).second) out.push_back({id, "id", "duplicate module id"});
    if (!std::isfinite(mod.water_value)) out.push_back({id, "water_value", "must be finite"});

    for (std::size_t n = 0; n < mod.segments.size(); ++n) {
      const auto& seg = mod.segments[n];
      if (!(seg.max_discharge > 0.0))
        out.push_back({id, "segments[" + std::to_string(n) + "].max_discharge", "must be > 0"});
      if (!(seg.energy_coeff > 0.0))
        out.push_back({id, "segments[" + std::to_string(n) + "].energy_coeff", "must be > 0"});
      if (n > 0 && seg.energy_coeff > mod.segments[n - 1].energy_coeff)
        out.push_back({id, "segments[" + std::to_string(n) + "].energy_coeff",
                       "must be non-increasing in segment index (convex turbine curve)"});
    }
    if (!(mod.max_bypass >= 0.0)) out.push_back({id, "max_bypass", "must be >= 0"});
    if (!(mod.max_spill >= 0.0)) out.push_back({id, "max_spill", "must be >= 0"});
    if (!(mod.max_volume >= 0.0)) out.push_back({id, "max_volume", "must be >= 0"});
    if (!(mod.initial_volume >= 0.0 && mod.initial_volume <= mod.max_volume))
      out.push_back({id, "initial_volume", "must lie in [0, max_volume]"});
    if (!(mod.max_production >= 0.0)) out.push_back({id, "max_production", "must be >= 0"});
    if (mod.max_production > mod.turbine_capacity() * (1.0 + 1e-12))
      out.push_back({id, "max_production", "exceeds turbine curve capacity sum(Q*E)"});
    if (mod.inflow.size() != T) out.push_back({id, "inflow", "length must equal period count"});

    auto check_target = [&](const std::optional<std::string>& target, const char* field) {
      if (!target) return;
      if (!topology.index_of(*target)) out.push_back({id, field, "unknown module '" + *target + "'"});
      if (*target == id) out.push_back({id, field, "module routes water into itself"});
    };
    check_target(mod.discharge_to, "discharge_to");
    check_target(mod.bypass_to, "bypass_to");
    check_target(mod.spill_to, "spill_to");
  }

  if (has_cycle(topology)) out.push_back({"", "modules", "waterway routing graph contains a cycle"});
  return out;
}

std::vector<Violation> validate_system(const HydroSystem& system) {
  auto out = validate_topology(system.topology, system.grid);
  const auto& c = system.costs;
  auto nonneg = [&](double v, const char* field) {
    if (!(v >= 0.0)) out.push_back({"", field, "must be >= 0"});
  };
  nonneg(c.load_shed, "costs.load_shed");
  nonneg(c.power_spill, "costs.power_spill");
  nonneg(c.bypass_penalty, "costs.bypass_penalty");
  nonneg(c.spill_penalty, "costs.spill_penalty");
  nonneg(c.reserve_epsilon, "costs.reserve_epsilon");
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <typename T>
T required(const ordered_json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing required key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T optional_or(const ordered_json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return required<T>(obj, key, where);
}

std::optional<std::string> optional_id(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return required<std::string>(obj, key, where);
}

HydroModule parse_module(const ordered_json& j, std::size_t index) {
  std::string where = "modules[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  HydroModule m;
  m.id = required<std::string>(j, "id", where);
  where += " (" + m.id + ")";
  m.water_value = required<double>(j, "water_value", where);
  if (!j.contains("segments") || !j.at("segments").is_array())
    throw ParseError(where + ": missing required array 'segments'");
  for (const auto& s : j.at("segments")) {
    DischargeSegment seg;
    seg.max_discharge = required<double>(s, "max_discharge", where + ".segments");
    seg.energy_coeff = required<double>(s, "energy_coeff", where + ".segments");
    m.segments.push_back(seg);
  }
  m.max_bypass = optional_or<double>(j, "max_bypass", 0.0, where);
  m.max_spill = optional_or<double>(j, "max_spill", 0.0, where);
  m.max_volume = required<double>(j, "max_volume", where);
  m.initial_volume = required<double>(j, "initial_volume", where);
  m.max_production = required<double>(j, "max_production", where);
  m.discharge_to = optional_id(j, "discharge_to", where);
  m.bypass_to = optional_id(j, "bypass_to", where);
  m.spill_to = optional_id(j, "spill_to", where);
  m.inflow = required<std::vector<double>>(j, "inflow", where);
  return m;
}

ordered_json module_to_json(const HydroModule& m) {
  ordered_json j;
  j["id"] = m.id;
  j["water_value"] = m.water_value;
  j["segments"] = ordered_json::array();
  for (const auto& s : m.segments)
    j["segments"].push_back({{"max_discharge", s.max_discharge}, {"energy_coeff", s.energy_coeff}});
  j["max_bypass"] = m.max_bypass;
  j["max_spill"] = m.max_spill;
  j["max_volume"] = m.max_volume;
  j["initial_volume"] = m.initial_volume;
  j["max_production"] = m.max_production;
  if (m.discharge_to) j["discharge_to"] = *m.discharge_to;
  if (m.bypass_to) j["bypass_to"] = *m.bypass_to;
  if (m.spill_to) j["spill_to"] = *m.spill_to;
  j["inflow"] = m.inflow;
  return j;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

HydroSystem parse_system(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed system file: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("system file: top level must be an object");
  for (const char* key : {"modules", "time_grid", "costs"})
    if (!root.contains(key)) throw ParseError(std::string("system file: missing top-level key '") + key + "'");
  if (!root.at("modules").is_array()) throw ParseError("system file: 'modules' must be an array");

  std::vector<HydroModule> modules;
  std::size_t i = 0;
  for (const auto& m : root.at("modules")) modules.push_back(parse_module(m, i++));

  HydroSystem sys;
  sys.topology = Topology(std::move(modules));

  const auto& g = root.at("time_grid");
  sys.grid.period_hours = required<std::vector<double>>(g, "period_hours", "time_grid");
  sys.grid.net_load = required<std::vector<double>>(g, "net_load", "time_grid");
  sys.grid.reserve_req = optional_or<std::vector<double>>(
      g, "reserve_req", std::vector<double>(sys.grid.period_hours.size(), 0.0), "time_grid");

  const auto& c = root.at("costs");
  sys.costs.load_shed = required<double>(c, "load_shed", "costs");
  sys.costs.power_spill = required<double>(c, "power_spill", "costs");
  sys.costs.bypass_penalty = required<double>(c, "bypass_penalty", "costs");
  sys.costs.spill_penalty = required<double>(c, "spill_penalty", "costs");
  sys.costs.reserve_epsilon = optional_or<double>(c, "reserve_epsilon", 1e-4, "costs");
  return sys;
}

HydroSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  HydroSystem sys = parse_system(buffer.str());
  if (auto violations = validate_system(sys); !violations.empty()) throw ValidationError(std::move(violations));
  return sys;
}

std::string serialize_system(const HydroSystem& system) {
  ordered_json root;
  root["modules"] = ordered_json::array();
  for (const auto& m : system.topology.modules()) root["modules"].push_back(module_to_json(m));
  root["time_grid"] = {{"period_hours", system.grid.period_hours},
                       {"net_load", system.grid.net_load},
                       {"reserve_req", system.grid.reserve_req}};
  root["costs"] = {{"load_shed", system.costs.load_shed},
                   {"power_spill", system.costs.power_spill},
                   {"bypass_penalty", system.costs.bypass_penalty},
                   {"spill_penalty", system.costs.spill_penalty},
                   {"reserve_epsilon", system.costs.reserve_epsilon}};
  return root.dump(2) + "\n";
}

void save_system(const HydroSystem& system, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write system file '" + path + "'");
  out << serialize_system(system);
}

std::string hash_text(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

std::string HydroSystem::fingerprint() const { return hash_text(serialize_system(*this)); }

// ---------------------------------------------------------------------------
// Schedule checks and export

std::vector<std::string> check_schedule(const HydroSystem& system, const Schedule& s, ScheduleTolerance tol) {
  std::vector<std::string> out;
  const auto& topo = system.topology;
  const std::size_t M = system.modules();
  const std::size_t T = system.periods();

  auto shape_ok = [&](const std::vector<std::vector<double>>& x, std::size_t cols) {
    if (x.size() != M) return false;
    for (const auto& row : x)
      if (row.size() != cols) return false;
    return true;
  };
  if (!shape_ok(s.production, T) || !shape_ok(s.reserve, T) || !shape_ok(s.bypass, T) || !shape_ok(s.spill, T) ||
      !shape_ok(s.flow_in, T) || !shape_ok(s.flow_out, T) || !shape_ok(s.volume, T + 1) ||
      s.segment_discharge.size() != M) {
    out.push_back("schedule dimensions do not match the system");
    return out;
  }
  for (std::size_t m = 0; m < M; ++m)
    if (s.segment_discharge[m].size() != topo[m].segments.size() ||
        (!s.segment_discharge[m].empty() && !std::all_of(s.segment_discharge[m].begin(), s.segment_discharge[m].end(),
                                                         [&](const auto& row) { return row.size() == T; }))) {
      out.push_back("segment discharge dimensions do not match module " + topo[m].id);
      return out;
    }

  auto fmt = [](const std::string& what, std::size_t m_or_t, std::size_t t, double value) {
    std::ostringstream os;
    os.precision(12);
    os << what << " [" << m_or_t << "," << t << "] residual " << value;
    return os.str();
  };

  for (std::size_t t = 0; t < T; ++t) {
    double total = 0.0;
    for (std::size_t m = 0; m < M; ++m) total += s.production[m][t];
    if (std::abs(total - system.grid.net_load[t]) > tol.power)
      out.push_back(fmt("power balance", 0, t, total - system.grid.net_load[t]));
  }

  for (std::size_t m = 0; m < M; ++m) {
    const auto& mod = topo[m];
    if (std::abs(s.volume[m][0] - mod.initial_volume) > tol.water)
      out.push_back(fmt("initial volume", m, 0, s.volume[m][0] - mod.initial_volume));
    for (std::size_t t = 0; t < T; ++t) {
      const double p = s.production[m][t], r = s.reserve[m][t];
      if (r < -tol.power) out.push_back(fmt("negative reserve", m, t, r));
      if (p + r > mod.max_production + tol.power) out.push_back(fmt("reserve above capacity", m, t, p + r - mod.max_production));
      if (p - r < -tol.power) out.push_back(fmt("reserve below zero output", m, t, p - r));

      double q_out = s.bypass[m][t] + s.spill[m][t];
      double energy = 0.0;
      for (std::size_t n = 0; n < mod.segments.size(); ++n) {
        const double q = s.segment_discharge[m][n][t];
        if (q < -tol.power || q > mod.segments[n].max_discharge + tol.power)
          out.push_back(fmt("segment discharge bound", m, t, q));
        q_out += q;
        energy += mod.segments[n].energy_coeff * q;
      }
      if (std::abs(energy - p) > tol.power) out.push_back(fmt("production curve", m, t, energy - p));
      if (s.bypass[m][t] < -tol.power || s.bypass[m][t] > mod.max_bypass + tol.power)
        out.push_back(fmt("bypass bound", m, t, s.bypass[m][t]));
      if (s.spill[m][t] < -tol.power || s.spill[m][t] > mod.max_spill + tol.power)
        out.push_back(fmt("spill bound", m, t, s.spill[m][t]));

      double q_in = 0.0;
      for (auto i : topo.discharge_from(m))
        for (std::size_t n = 0; n < topo[i].segments.size(); ++n) q_in += s.segment_discharge[i][n][t];
      for (auto i : topo.bypass_from(m)) q_in += s.bypass[i][t];
      for (auto i : topo.spill_from(m)) q_in += s.spill[i][t];
      if (std::abs(q_in - s.flow_in[m][t]) > tol.power) out.push_back(fmt("inflow aggregation", m, t, q_in - s.flow_in[m][t]));
      if (std::abs(q_out - s.flow_out[m][t]) > tol.power)
        out.push_back(fmt("outflow aggregation", m, t, q_out - s.flow_out[m][t]));

      const double residual = s.volume[m][t + 1] - s.volume[m][t] -
                              flow_to_volume(s.flow_in[m][t] - s.flow_out[m][t] + mod.inflow[t],
                                             system.grid.period_hours[t]);
      if (std::abs(residual) > tol.water) out.push_back(fmt("water balance", m, t, residual));
    }
    for (std::size_t t = 0; t <= T; ++t) {
      const double v = s.volume[m][t];
      if (v < -tol.water || v > mod.max_volume + tol.water) out.push_back(fmt("volume bound", m, t, v));
    }
  }
  return out;
}

void write_schedule_csv(const HydroSystem& system, const Schedule& s, const std::string& path,
                        const std::string& manifest_id) {
  CsvWriter csv(path, manifest_id);
  csv.row({"module", "period", "production_mw", "reserve_mw", "discharge_m3s", "segment_discharge_m3s",
           "bypass_m3s", "spill_m3s", "flow_in_m3s", "flow_out_m3s", "volume_start_mm3", "volume_end_mm3"});
  for (std::size_t m = 0; m < system.modules(); ++m) {
    for (std::size_t t = 0; t < system.periods(); ++t) {
      double total = 0.0;
      std::string segments;
      for (std::size_t n = 0; n < s.segment_discharge[m].size(); ++n) {
        total += s.segment_discharge[m][n][t];
        if (n) segments += ';';
        segments += format_number(s.segment_discharge[m][n][t]);
      }
      csv.row({system.topology[m].id, std::to_string(t + 1), format_number(s.production[m][t]),
               format_number(s.reserve[m][t]), format_number(total), segments, format_number(s.bypass[m][t]),
               format_number(s.spill[m][t]), format_number(s.flow_in[m][t]), format_number(s.flow_out[m][t]),
               format_number(s.volume[m][t]), format_number(s.volume[m][t + 1])});
    }
  }
}

void write_reserve_csv(const HydroSystem& system, const Schedule& s, const std::string& path,
                       const std::string& manifest_id) {
  CsvWriter csv(path, manifest_id);
  csv.row({"module", "period", "reserve_mw"});
  for (std::size_t m = 0; m < system.modules(); ++m)
    for (std::size_t t = 0; t < system.periods(); ++t)
      csv.row({system.topology[m].id, std::to_string(t + 1), format_number(s.reserve[m][t])});
}

}  // namespace hydro
