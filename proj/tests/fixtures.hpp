#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hydro/system.hpp"

namespace fixtures {

inline std::string data(const std::string& name) { return std::string(HYDRO_DATA_DIR) + "/" + name; }

inline hydro::HydroSystem c1() { return hydro::load_system(data("c1.json")); }
inline hydro::HydroSystem c2() { return hydro::load_system(data("c2.json")); }
inline hydro::HydroSystem synthetic() { return hydro::load_system(data("synthetic12.json")); }

/// Rebuilds the topology after editing modules.
template <class Fn>
hydro::HydroSystem edit_modules(const hydro::HydroSystem& system, Fn&& fn) {
  auto modules = system.topology.modules();
  fn(modules);
  hydro::HydroSystem out = system;
  out.topology = hydro::Topology(std::move(modules));
  return out;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hydroreserve_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
