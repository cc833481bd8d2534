#pragma once

#include <map>
#include <string>
#include <vector>

#include "bamsim/bam_config.hpp"
#include "bamsim/controller.hpp"
#include "bamsim/traffic.hpp"
#include "bamsim/types.hpp"

namespace bamsim {

struct TopologySpec {
  std::vector<std::string> links;
  std::map<std::string, std::vector<std::string>> routes;
};

struct SimSpec {
  double duration = 3000.0;
  double epoch_length = 100.0;
  int warmup_epochs = 5;  // excluded from run totals
};

struct ControllerSpec {
  ControllerMode mode = ControllerMode::Rules;
  CbrParams cbr;
  RlParams rl;
  std::string memory_in;   // optional snapshot to start from
  std::string memory_out;  // optional snapshot to write after the run
};

// A full simulation recipe, parsed from JSON. All fields have defaults; the
// zero-argument config is a valid single-link three-class scenario.
struct ScenarioConfig {
  int classes = 3;
  TopologySpec topology;
  Bandwidth capacity = 100;
  BamKind initial_bam = BamKind::MAM;
  SwitchMode switch_mode = SwitchMode::EnforceNew;
  std::vector<Bandwidth> mam_bc;
  std::vector<Bandwidth> rdm_bc;
  std::vector<Bandwidth> atcs_bc;
  ControllerSpec controller;
  ManagerPolicy policy;
  WorkloadSpec workload;                  // duration mirrors sim.duration
  std::vector<std::string> class_routes;  // route carrying each class
  SimSpec sim;

  BamConfigSet config_set() const;
  int total_epochs() const;
};

// Scenario with every default filled in.
ScenarioConfig default_scenario();

// Parses and validates. Returns all problems, each prefixed with the JSON
// path of the offending field; `out` is complete only when the list is empty.
std::vector<std::string> scenario_from_json(const std::string& text,
                                            ScenarioConfig& out);

// Same, but throws the first problem instead.
ScenarioConfig scenario_from_json_or_throw(const std::string& text);

// Canonical JSON for the effective configuration: defaults filled in, keys
// sorted, byte-stable for identical configs.
std::string scenario_to_json(const ScenarioConfig& config);

}  // namespace bamsim
