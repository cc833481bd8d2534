#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "bamsim/scenario.hpp"
#include "bamsim/types.hpp"

using namespace bamsim;

namespace {

std::vector<std::string> errors_of(const std::string& text) {
  ScenarioConfig config;
  return scenario_from_json(text, config);
}

bool mentions(const std::vector<std::string>& errors,
              const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const std::string& e) {
                       return e.find(needle) != std::string::npos;
                     });
}

}  // namespace

TEST_CASE("an empty scenario file means the default configuration") {
  ScenarioConfig config;
  auto errors = scenario_from_json("{}", config);
  REQUIRE(errors.empty());
  CHECK(config.classes == 3);
  CHECK(config.capacity == 100);
  CHECK(config.initial_bam == BamKind::MAM);
  CHECK(config.switch_mode == SwitchMode::EnforceNew);
  CHECK(config.mam_bc == std::vector<Bandwidth>({60, 50, 40}));
  CHECK(config.rdm_bc == std::vector<Bandwidth>({60, 85, 100}));
  CHECK(config.atcs_bc == std::vector<Bandwidth>({50, 30, 20}));
  CHECK(config.controller.mode == ControllerMode::Rules);
  CHECK(config.topology.links == std::vector<std::string>{"link0"});
  CHECK(config.class_routes ==
        std::vector<std::string>({"r0", "r0", "r0"}));
  CHECK(config.sim.duration == 3000.0);
  CHECK(config.total_epochs() == 30);
  CHECK(config.workload.duration == config.sim.duration);
  CHECK(config.config_set().validate().empty());
  CHECK(scenario_to_json(config) == scenario_to_json(default_scenario()));
}

TEST_CASE("the canonical echo is byte-stable through a round trip") {
  const std::string text = R"({
    "schema_version": 1,
    "bam": {"initial": "RDM", "switch_mode": "keep_all"},
    "controller": {"mode": "cbr", "cbr": {"theta_sim": 0.2}},
    "policy": {"w_loss": 0.5},
    "sim": {"duration": 800, "epoch_length": 40, "warmup_epochs": 2},
    "workload": {
      "demands": {"values": [2, 4]},
      "phases": [
        {"loads": ["high", "low", "low"], "dwell": 400},
        {"loads": ["low", "medium", "high"], "dwell": 400}
      ]
    }
  })";
  ScenarioConfig config;
  REQUIRE(scenario_from_json(text, config).empty());
  CHECK(config.initial_bam == BamKind::RDM);
  CHECK(config.switch_mode == SwitchMode::KeepAll);
  CHECK(config.controller.cbr.theta_sim == 0.2);
  CHECK(config.controller.cbr.theta_retain == 0.05);  // default kept
  CHECK(config.workload.demands.values == std::vector<Bandwidth>({2, 4}));
  CHECK(config.workload.demands.weights == std::vector<double>({1.0, 1.0}));
  CHECK(config.workload.phases.size() == 2);
  CHECK(config.total_epochs() == 20);

  const std::string canon = scenario_to_json(config);
  ScenarioConfig reparsed;
  REQUIRE(scenario_from_json(canon, reparsed).empty());
  CHECK(scenario_to_json(reparsed) == canon);
}

TEST_CASE("problems are reported with their field paths, all at once") {
  auto errors = errors_of(R"({
    "classes": 99,
    "bam": {"capacity": 0},
    "policy": {"w_util": -1},
    "sim": {"duration": 250, "epoch_length": 100}
  })");
  CHECK(errors.size() >= 4);
  CHECK(mentions(errors, "classes"));
  CHECK(mentions(errors, "bam.capacity"));
  CHECK(mentions(errors, "policy.w_util"));
  CHECK(mentions(errors, "whole number of epochs"));
}

TEST_CASE("unknown and malformed fields are named") {
  CHECK(mentions(errors_of(R"({"bandwith": 1})"), "unknown field"));
  CHECK(mentions(errors_of(R"({"bandwith": 1})"), "bandwith"));
  CHECK(mentions(errors_of(R"({"bam": {"color": "red"}})"), "bam.color"));
  CHECK(mentions(errors_of("not json at all"), "not valid JSON"));
  CHECK(mentions(errors_of("[1,2]"), "must be a JSON object"));
  CHECK(mentions(errors_of(R"({"schema_version": 2})"), "schema_version"));
  CHECK(mentions(errors_of(R"({"bam": {"initial": "FOO"}})"),
                 "must be MAM, RDM or ATCS"));
  CHECK(mentions(errors_of(R"({"controller": {"mode": "magic"}})"),
                 "controller.mode"));
}

TEST_CASE("model shapes are validated against the capacity") {
  CHECK(mentions(errors_of(R"({"bam": {"rdm_bc": [60, 50, 100]}})"), "bam: "));
  CHECK(mentions(errors_of(R"({"bam": {"rdm_bc": [60, 85, 99]}})"), "bam: "));
  CHECK(mentions(errors_of(R"({"bam": {"atcs_bc": [50, 30, 21]}})"), "bam: "));
  CHECK(mentions(errors_of(R"({"bam": {"mam_bc": [101, 50, 40]}})"), "bam: "));

  // Custom capacity without explicit shares cannot fall back to defaults.
  auto errors = errors_of(R"({"bam": {"capacity": 200}})");
  CHECK(mentions(errors, "required when capacity or classes are custom"));

  ScenarioConfig config;
  CHECK(scenario_from_json(R"({"bam": {
    "capacity": 200,
    "mam_bc": [120, 100, 80],
    "rdm_bc": [120, 170, 200],
    "atcs_bc": [100, 60, 40]
  }})",
                           config)
            .empty());
  CHECK(config.capacity == 200);
  CHECK(config.workload.reference_bc ==
        std::vector<Bandwidth>({120, 100, 80}));
}

TEST_CASE("class counts other than three restrict the controller") {
  const std::string two_class_bam = R"("bam": {
    "mam_bc": [60, 40],
    "rdm_bc": [60, 100],
    "atcs_bc": [60, 40]
  }, "workload": {"phases": [{"loads": ["medium", "medium"], "dwell": 3000}]})";

  auto errors = errors_of(R"({"classes": 2, )" + two_class_bam +
                          R"(, "controller": {"mode": "static"}})");
  CHECK(errors.empty());

  errors = errors_of(R"({"classes": 2, )" + two_class_bam + "}");
  CHECK(mentions(errors, "exactly 3 classes"));

  CHECK(mentions(errors_of(R"({"classes": 2})"),
                 "required when capacity or classes are custom"));
  CHECK(mentions(errors_of(R"({"classes": 0})"), "classes"));
}

TEST_CASE("controller knobs are range-checked") {
  CHECK(mentions(errors_of(R"({"controller": {"rl": {"alpha": 0}}})"),
                 "controller.rl.alpha"));
  CHECK(mentions(errors_of(R"({"controller": {"rl": {"gamma": 1.5}}})"),
                 "controller.rl.gamma"));
  CHECK(mentions(errors_of(R"({"controller": {"rl": {"epsilon": -0.1}}})"),
                 "controller.rl.epsilon"));
  CHECK(mentions(errors_of(R"({"controller": {"cbr": {"theta_sim": -1}}})"),
                 "controller.cbr.theta_sim"));
  CHECK(mentions(errors_of(R"({"controller": {"cbr": {"capacity": 0}}})"),
                 "controller.cbr.capacity"));
  CHECK(mentions(
      errors_of(R"({"controller": {"mode": "rules", "memory_in": "x.json"}})"),
      "only a cbr or rl controller keeps memory"));

  ScenarioConfig config;
  CHECK(scenario_from_json(
            R"({"controller": {"mode": "rl", "memory_out": "q.json"}})",
            config)
            .empty());
  CHECK(config.controller.memory_out == "q.json");
}

TEST_CASE("workloads bind classes to routes explicitly when needed") {
  const std::string net = R"("topology": {
    "links": ["a", "b"],
    "routes": {"left": ["a"], "right": ["b"], "both": ["a", "b"]}
  })";

  CHECK(mentions(errors_of("{" + net + "}"),
                 "required when several routes exist"));
  CHECK(mentions(errors_of("{" + net + R"(, "workload": {"route": "nope"}})"),
                 "unknown route"));
  CHECK(mentions(
      errors_of("{" + net +
                R"(, "workload": {"route": "left",
                                  "class_routes": ["left", "left", "left"]}})"),
      "give route or class_routes, not both"));
  CHECK(mentions(
      errors_of("{" + net + R"(, "workload": {"class_routes": ["left"]}})"),
      "must list one route per class"));

  ScenarioConfig config;
  REQUIRE(scenario_from_json(
              "{" + net + R"(, "workload": {"route": "both"}})", config)
              .empty());
  CHECK(config.class_routes ==
        std::vector<std::string>({"both", "both", "both"}));

  REQUIRE(scenario_from_json(
              "{" + net +
                  R"(, "workload": {"class_routes":
                      ["left", "right", "both"]}})",
              config)
              .empty());
  CHECK(config.class_routes ==
        std::vector<std::string>({"left", "right", "both"}));
}

TEST_CASE("simulation timing must partition into epochs") {
  CHECK(mentions(errors_of(R"({"sim": {"duration": -5}})"), "sim.duration"));
  CHECK(mentions(errors_of(R"({"sim": {"epoch_length": 0}})"),
                 "sim.epoch_length"));
  CHECK(mentions(errors_of(R"({"sim": {"warmup_epochs": 30}})"),
                 "must leave at least one measured epoch"));
  CHECK(mentions(errors_of(R"({"sim": {"warmup_epochs": -1}})"),
                 "sim.warmup_epochs"));
  CHECK(errors_of(R"({"sim": {"duration": 500, "epoch_length": 50,
                              "warmup_epochs": 9}})")
            .empty());
}

TEST_CASE("the throwing parser reports the first problem") {
  try {
    scenario_from_json_or_throw(R"({"bam": {"capacity": -1}})");
    REQUIRE(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidScenario);
    CHECK(std::string(e.what()).find("bam.capacity") != std::string::npos);
  }
  const ScenarioConfig config = scenario_from_json_or_throw("{}");
  CHECK(config.classes == 3);
}
