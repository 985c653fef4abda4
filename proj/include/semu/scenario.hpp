// Scenario files: one JSON document describing exactly one run
// configuration (system parameters, algorithm, schedule, workload, enabled
// checks). Unknown keys are rejected. A canonical example ships in
// docs/scenario-format.md.
#pragma once

#include <stdexcept>

#include "semu/simulator.hpp"

namespace semu {

struct ChecksConfig {
  bool atomicity = true;
  bool liveness = true;
  bool cost_regression = false;
};

struct Scenario {
  std::string name = "scenario";
  RunConfig cfg;
  ChecksConfig checks;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
std::string canonical_scenario_example();

}  // namespace semu
