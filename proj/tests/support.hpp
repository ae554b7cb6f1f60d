#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "wonder/mecd_model.hpp"
#include "wonder/scenario.hpp"
#include "wonder/topology_loader.hpp"

namespace wonder::fixtures {

inline std::string fixture_path(const std::string& name) {
  return std::string(WONDER_FIXTURES) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Topology ref5() { return load_topology(read_file(fixture_path("ref5_topology.json"))); }

inline Scenario scenario(const std::string& name) {
  return load_scenario_file(fixture_path(name + ".json"));
}

inline std::vector<std::string> elements_of(const std::vector<Hop>& trace) {
  std::vector<std::string> out;
  for (const auto& h : trace)
    if (out.empty() || out.back() != h.element_id) out.push_back(h.element_id);
  return out;
}

}  // namespace wonder::fixtures
