#include "bamsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace bamsim {

namespace {

using nlohmann::json;

constexpr int kMaxClasses = 8;  // keeps exact share assignment tractable

std::string path_join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

struct Parser {
  std::vector<std::string> errors;

  void err(const std::string& path, const std::string& message) {
    errors.push_back(path + ": " + message);
  }

  void check_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (allowed.count(it.key()) == 0) {
        err(path_join(path, it.key()), "unknown field");
      }
    }
  }

  const json* field(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  bool get_object(const json& obj, const std::string& path,
                  const std::string& key, const json*& out) {
    const json* j = field(obj, key);
    if (!j) return false;
    if (!j->is_object()) {
      err(path_join(path, key), "must be an object");
      return false;
    }
    out = j;
    return true;
  }

  void get_int(const json& obj, const std::string& path,
               const std::string& key, std::int64_t min_value,
               std::int64_t max_value, std::int64_t& out) {
    const json* j = field(obj, key);
    if (!j) return;
    if (!j->is_number_integer()) {
      err(path_join(path, key), "must be an integer");
      return;
    }
    const auto v = j->get<std::int64_t>();
    if (v < min_value || v > max_value) {
      err(path_join(path, key),
          "must be between " + std::to_string(min_value) + " and " +
              std::to_string(max_value));
      return;
    }
    out = v;
  }

  void get_number(const json& obj, const std::string& path,
                  const std::string& key, double& out) {
    const json* j = field(obj, key);
    if (!j) return;
    if (!j->is_number()) {
      err(path_join(path, key), "must be a number");
      return;
    }
    out = j->get<double>();
  }

  void get_string(const json& obj, const std::string& path,
                  const std::string& key, std::string& out) {
    const json* j = field(obj, key);
    if (!j) return;
    if (!j->is_string()) {
      err(path_join(path, key), "must be a string");
      return;
    }
    out = j->get<std::string>();
  }

  bool get_band_vector(const json& obj, const std::string& path,
                       const std::string& key, int expected,
                       std::vector<Bandwidth>& out) {
    const json* j = field(obj, key);
    if (!j) return false;
    const std::string at = path_join(path, key);
    if (!j->is_array()) {
      err(at, "must be an array of integers");
      return false;
    }
    std::vector<Bandwidth> parsed;
    for (const json& e : *j) {
      if (!e.is_number_integer()) {
        err(at, "must be an array of integers");
        return false;
      }
      parsed.push_back(e.get<Bandwidth>());
    }
    if (static_cast<int>(parsed.size()) != expected) {
      err(at, "must list one value per class");
      return false;
    }
    out = std::move(parsed);
    return true;
  }
};

void parse_topology(Parser& p, const json& root, ScenarioConfig& out) {
  const json* topo = nullptr;
  if (!p.get_object(root, "", "topology", topo)) return;
  p.check_keys(*topo, "topology", {"links", "routes"});

  if (const json* links = p.field(*topo, "links")) {
    if (!links->is_array() || links->empty()) {
      p.err("topology.links", "must be a non-empty array of link ids");
    } else {
      std::vector<std::string> ids;
      std::set<std::string> seen;
      for (const json& e : *links) {
        if (!e.is_string() || e.get<std::string>().empty()) {
          p.err("topology.links", "link ids must be non-empty strings");
          return;
        }
        const auto id = e.get<std::string>();
        if (!seen.insert(id).second) {
          p.err("topology.links", "duplicate link id " + id);
          return;
        }
        ids.push_back(id);
      }
      out.topology.links = std::move(ids);
      out.topology.routes = {{"r0", out.topology.links}};
    }
  }

  if (const json* routes = p.field(*topo, "routes")) {
    if (!routes->is_object() || routes->empty()) {
      p.err("topology.routes", "must be a non-empty object of link lists");
      return;
    }
    std::map<std::string, std::vector<std::string>> parsed;
    for (auto it = routes->begin(); it != routes->end(); ++it) {
      const std::string at = "topology.routes." + it.key();
      if (!it.value().is_array() || it.value().empty()) {
        p.err(at, "must be a non-empty array of link ids");
        return;
      }
      std::vector<std::string> members;
      std::set<std::string> seen;
      for (const json& e : it.value()) {
        if (!e.is_string()) {
          p.err(at, "link ids must be strings");
          return;
        }
        const auto id = e.get<std::string>();
        if (std::find(out.topology.links.begin(), out.topology.links.end(),
                      id) == out.topology.links.end()) {
          p.err(at, "unknown link " + id);
          return;
        }
        if (!seen.insert(id).second) {
          p.err(at, "repeats link " + id);
          return;
        }
        members.push_back(id);
      }
      parsed[it.key()] = std::move(members);
    }
    out.topology.routes = std::move(parsed);
  }
}

void parse_bam(Parser& p, const json& root, ScenarioConfig& out,
               bool& custom_shape) {
  static const json kEmpty = json::object();
  const json* bam = nullptr;
  if (!p.get_object(root, "", "bam", bam)) {
    if (root.contains("bam")) return;  // present but malformed: already noted
    bam = &kEmpty;  // absent: defaults, but custom shapes still need shares
  }
  p.check_keys(*bam, "bam",
               {"capacity", "initial", "switch_mode", "mam_bc", "rdm_bc",
                "atcs_bc"});

  std::int64_t capacity = out.capacity;
  p.get_int(*bam, "bam", "capacity", 1, 1'000'000, capacity);
  custom_shape = custom_shape || capacity != 100;
  out.capacity = capacity;

  std::string initial;
  p.get_string(*bam, "bam", "initial", initial);
  if (!initial.empty()) {
    if (auto kind = bam_kind_from_string(initial)) {
      out.initial_bam = *kind;
    } else {
      p.err("bam.initial", "must be MAM, RDM or ATCS");
    }
  }

  std::string mode;
  p.get_string(*bam, "bam", "switch_mode", mode);
  if (!mode.empty()) {
    if (auto m = switch_mode_from_string(mode)) {
      out.switch_mode = *m;
    } else {
      p.err("bam.switch_mode", "must be keep_all or enforce_new");
    }
  }

  struct Slot {
    const char* key;
    std::vector<Bandwidth>* dest;
  };
  for (const Slot& s : {Slot{"mam_bc", &out.mam_bc}, Slot{"rdm_bc", &out.rdm_bc},
                        Slot{"atcs_bc", &out.atcs_bc}}) {
    if (!p.get_band_vector(*bam, "bam", s.key, out.classes, *s.dest) &&
        custom_shape && !p.field(*bam, s.key)) {
      p.err(path_join("bam", s.key),
            "required when capacity or classes are custom");
    }
  }
}

void parse_controller(Parser& p, const json& root, ScenarioConfig& out) {
  const json* ctl = nullptr;
  if (!p.get_object(root, "", "controller", ctl)) return;
  p.check_keys(*ctl, "controller",
               {"mode", "cbr", "rl", "memory_in", "memory_out"});

  std::string mode;
  p.get_string(*ctl, "controller", "mode", mode);
  if (!mode.empty()) {
    if (auto m = controller_mode_from_string(mode)) {
      out.controller.mode = *m;
    } else {
      p.err("controller.mode", "must be static, rules, cbr or rl");
    }
  }

  const json* cbr = nullptr;
  if (p.get_object(*ctl, "controller", "cbr", cbr)) {
    p.check_keys(*cbr, "controller.cbr",
                 {"theta_sim", "theta_retain", "capacity"});
    p.get_number(*cbr, "controller.cbr", "theta_sim",
                 out.controller.cbr.theta_sim);
    p.get_number(*cbr, "controller.cbr", "theta_retain",
                 out.controller.cbr.theta_retain);
    std::int64_t cap = static_cast<std::int64_t>(out.controller.cbr.capacity);
    p.get_int(*cbr, "controller.cbr", "capacity", 1, 1'000'000, cap);
    out.controller.cbr.capacity = static_cast<std::size_t>(cap);
    if (out.controller.cbr.theta_sim < 0.0) {
      p.err("controller.cbr.theta_sim", "must be non-negative");
    }
    if (out.controller.cbr.theta_retain < 0.0) {
      p.err("controller.cbr.theta_retain", "must be non-negative");
    }
  }

  const json* rl = nullptr;
  if (p.get_object(*ctl, "controller", "rl", rl)) {
    p.check_keys(*rl, "controller.rl", {"alpha", "gamma", "epsilon"});
    p.get_number(*rl, "controller.rl", "alpha", out.controller.rl.alpha);
    p.get_number(*rl, "controller.rl", "gamma", out.controller.rl.gamma);
    p.get_number(*rl, "controller.rl", "epsilon", out.controller.rl.epsilon);
    if (out.controller.rl.alpha <= 0.0 || out.controller.rl.alpha > 1.0) {
      p.err("controller.rl.alpha", "must be in (0, 1]");
    }
    if (out.controller.rl.gamma < 0.0 || out.controller.rl.gamma > 1.0) {
      p.err("controller.rl.gamma", "must be in [0, 1]");
    }
    if (out.controller.rl.epsilon < 0.0 || out.controller.rl.epsilon > 1.0) {
      p.err("controller.rl.epsilon", "must be in [0, 1]");
    }
  }

  p.get_string(*ctl, "controller", "memory_in", out.controller.memory_in);
  p.get_string(*ctl, "controller", "memory_out", out.controller.memory_out);
  const bool keeps_memory = out.controller.mode == ControllerMode::Cbr ||
                            out.controller.mode == ControllerMode::Rl;
  if (!keeps_memory && !out.controller.memory_in.empty()) {
    p.err("controller.memory_in", "only a cbr or rl controller keeps memory");
  }
  if (!keeps_memory && !out.controller.memory_out.empty()) {
    p.err("controller.memory_out", "only a cbr or rl controller keeps memory");
  }
}

void parse_policy(Parser& p, const json& root, ScenarioConfig& out) {
  const json* pol = nullptr;
  if (!p.get_object(root, "", "policy", pol)) return;
  p.check_keys(*pol, "policy", {"w_util", "w_block", "w_loss", "switch_cost"});
  p.get_number(*pol, "policy", "w_util", out.policy.w_util);
  p.get_number(*pol, "policy", "w_block", out.policy.w_block);
  p.get_number(*pol, "policy", "w_loss", out.policy.w_loss);
  p.get_number(*pol, "policy", "switch_cost", out.policy.switch_cost);
  if (out.policy.w_util < 0.0) p.err("policy.w_util", "must be non-negative");
  if (out.policy.w_block < 0.0) {
    p.err("policy.w_block", "must be non-negative");
  }
  if (out.policy.w_loss < 0.0) p.err("policy.w_loss", "must be non-negative");
  if (out.policy.switch_cost < 0.0) {
    p.err("policy.switch_cost", "must be non-negative");
  }
}

void parse_workload(Parser& p, const json& root, ScenarioConfig& out) {
  const json* wl = nullptr;
  const bool given = p.get_object(root, "", "workload", wl);

  std::string route;
  std::vector<std::string> class_routes;
  bool have_class_routes = false;
  bool have_reference = false;

  if (given) {
    p.check_keys(*wl, "workload",
                 {"route", "class_routes", "reference_bc", "demands",
                  "mean_holding", "phases"});
    p.get_string(*wl, "workload", "route", route);

    if (const json* cr = p.field(*wl, "class_routes")) {
      if (!cr->is_array() ||
          static_cast<int>(cr->size()) != out.classes) {
        p.err("workload.class_routes", "must list one route per class");
      } else {
        have_class_routes = true;
        for (const json& e : *cr) {
          if (!e.is_string()) {
            p.err("workload.class_routes", "route names must be strings");
            have_class_routes = false;
            break;
          }
          class_routes.push_back(e.get<std::string>());
        }
      }
    }

    have_reference = p.get_band_vector(*wl, "workload", "reference_bc",
                                       out.classes,
                                       out.workload.reference_bc);

    const json* demands = nullptr;
    if (p.get_object(*wl, "workload", "demands", demands)) {
      p.check_keys(*demands, "workload.demands", {"values", "weights"});
      const json* values = p.field(*demands, "values");
      const json* weights = p.field(*demands, "weights");
      if (!values || !values->is_array() || values->empty()) {
        p.err("workload.demands.values",
              "must be a non-empty array of integers");
      } else {
        std::vector<Bandwidth> vs;
        for (const json& e : *values) {
          if (!e.is_number_integer()) {
            p.err("workload.demands.values",
                  "must be a non-empty array of integers");
            vs.clear();
            break;
          }
          vs.push_back(e.get<Bandwidth>());
        }
        if (!vs.empty()) {
          out.workload.demands.values = std::move(vs);
          out.workload.demands.weights.assign(
              out.workload.demands.values.size(), 1.0);
        }
      }
      if (weights) {
        if (!weights->is_array()) {
          p.err("workload.demands.weights", "must be an array of numbers");
        } else {
          std::vector<double> ws;
          for (const json& e : *weights) {
            if (!e.is_number()) {
              p.err("workload.demands.weights", "must be an array of numbers");
              ws.clear();
              break;
            }
            ws.push_back(e.get<double>());
          }
          if (!ws.empty()) out.workload.demands.weights = std::move(ws);
        }
      }
    }

    p.get_number(*wl, "workload", "mean_holding", out.workload.mean_holding);

    if (const json* phases = p.field(*wl, "phases")) {
      if (!phases->is_array() || phases->empty()) {
        p.err("workload.phases", "must be a non-empty array");
      } else {
        std::vector<PhaseSpec> parsed;
        for (std::size_t i = 0; i < phases->size(); ++i) {
          const std::string at = "workload.phases[" + std::to_string(i) + "]";
          const json& pj = (*phases)[i];
          if (!pj.is_object()) {
            p.err(at, "must be an object");
            continue;
          }
          p.check_keys(pj, at, {"loads", "rates", "dwell"});
          PhaseSpec phase;
          if (const json* loads = p.field(pj, "loads")) {
            if (!loads->is_array()) {
              p.err(at + ".loads", "must be an array of load levels");
            } else {
              for (const json& e : *loads) {
                auto level = e.is_string()
                                 ? load_level_from_string(e.get<std::string>())
                                 : std::nullopt;
                if (!level) {
                  p.err(at + ".loads", "levels must be low, medium or high");
                  phase.loads.clear();
                  break;
                }
                phase.loads.push_back(*level);
              }
            }
          }
          if (const json* rates = p.field(pj, "rates")) {
            if (!rates->is_array()) {
              p.err(at + ".rates", "must be an array of numbers");
            } else {
              for (const json& e : *rates) {
                if (!e.is_number()) {
                  p.err(at + ".rates", "must be an array of numbers");
                  phase.rates.clear();
                  break;
                }
                phase.rates.push_back(e.get<double>());
              }
            }
          }
          p.get_number(pj, at, "dwell", phase.dwell);
          parsed.push_back(std::move(phase));
        }
        out.workload.phases = std::move(parsed);
      }
    }
  }

  if (!have_reference) out.workload.reference_bc = out.mam_bc;

  if (!route.empty() && have_class_routes) {
    p.err("workload.route", "give route or class_routes, not both");
  } else if (have_class_routes) {
    out.class_routes = std::move(class_routes);
  } else if (!route.empty()) {
    out.class_routes.assign(out.classes, route);
  } else if (out.topology.routes.size() == 1) {
    out.class_routes.assign(out.classes, out.topology.routes.begin()->first);
  } else {
    p.err("workload.route", "required when several routes exist");
  }
  for (const std::string& r : out.class_routes) {
    if (out.topology.routes.count(r) == 0) {
      p.err("workload.route", "unknown route " + r);
      break;
    }
  }
}

void parse_sim(Parser& p, const json& root, ScenarioConfig& out) {
  const json* sim = nullptr;
  if (p.get_object(root, "", "sim", sim)) {
    p.check_keys(*sim, "sim", {"duration", "epoch_length", "warmup_epochs"});
    p.get_number(*sim, "sim", "duration", out.sim.duration);
    p.get_number(*sim, "sim", "epoch_length", out.sim.epoch_length);
    std::int64_t warmup = out.sim.warmup_epochs;
    p.get_int(*sim, "sim", "warmup_epochs", 0, 1'000'000, warmup);
    out.sim.warmup_epochs = static_cast<int>(warmup);
  }
  if (out.sim.duration <= 0.0) {
    p.err("sim.duration", "must be positive");
    return;
  }
  if (out.sim.epoch_length <= 0.0) {
    p.err("sim.epoch_length", "must be positive");
    return;
  }
  const double ratio = out.sim.duration / out.sim.epoch_length;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    p.err("sim.duration", "must be a whole number of epochs");
    return;
  }
  if (out.sim.warmup_epochs >= static_cast<int>(rounded)) {
    p.err("sim.warmup_epochs", "must leave at least one measured epoch");
  }
}

}  // namespace

BamConfigSet ScenarioConfig::config_set() const {
  return BamConfigSet(capacity, mam_bc, rdm_bc, atcs_bc);
}

int ScenarioConfig::total_epochs() const {
  return static_cast<int>(std::round(sim.duration / sim.epoch_length));
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.topology.links = {"link0"};
  c.topology.routes = {{"r0", {"link0"}}};
  c.mam_bc = {60, 50, 40};
  c.rdm_bc = {60, 85, 100};
  c.atcs_bc = {50, 30, 20};
  c.workload.class_count = c.classes;
  c.workload.demands.values = {1, 5, 10};
  c.workload.demands.weights = {1.0, 1.0, 1.0};
  c.workload.mean_holding = 1.0;
  c.workload.reference_bc = c.mam_bc;
  PhaseSpec phase;
  phase.loads = {LoadLevel::Medium, LoadLevel::Medium, LoadLevel::Medium};
  phase.dwell = c.sim.duration;
  c.workload.phases = {phase};
  c.workload.duration = c.sim.duration;
  c.class_routes = {"r0", "r0", "r0"};
  return c;
}

std::vector<std::string> scenario_from_json(const std::string& text,
                                            ScenarioConfig& out) {
  out = default_scenario();
  Parser p;

  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) {
    p.errors.push_back("$: not valid JSON");
    return p.errors;
  }
  if (!root.is_object()) {
    p.errors.push_back("$: must be a JSON object");
    return p.errors;
  }
  p.check_keys(root, "",
               {"schema_version", "classes", "topology", "bam", "controller",
                "policy", "workload", "sim"});

  if (const json* v = p.field(root, "schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != 1) {
      p.err("schema_version", "must be 1");
    }
  }

  std::int64_t classes = out.classes;
  p.get_int(root, "", "classes", 1, kMaxClasses, classes);
  bool custom_shape = classes != 3;
  out.classes = static_cast<int>(classes);
  out.workload.class_count = out.classes;
  if (custom_shape) {
    out.mam_bc.clear();
    out.rdm_bc.clear();
    out.atcs_bc.clear();
    out.class_routes.assign(out.classes, "r0");
  }

  parse_topology(p, root, out);
  parse_bam(p, root, out, custom_shape);
  parse_controller(p, root, out);
  parse_policy(p, root, out);
  parse_sim(p, root, out);
  out.workload.duration = out.sim.duration;
  if (custom_shape) {
    PhaseSpec phase;
    phase.loads.assign(out.classes, LoadLevel::Medium);
    phase.dwell = out.sim.duration;
    out.workload.phases = {phase};
    out.workload.reference_bc.clear();
  }
  parse_workload(p, root, out);

  const bool adaptive = out.controller.mode != ControllerMode::Static;
  if (adaptive && out.classes != 3) {
    p.err("controller.mode",
          "rules, cbr and rl controllers need exactly 3 classes");
  }

  if (!p.errors.empty()) return p.errors;

  for (const auto& e : out.config_set().validate()) {
    p.errors.push_back("bam: " + e);
  }
  for (const auto& e : out.workload.validate()) {
    p.errors.push_back("workload: " + e);
  }
  return p.errors;
}

ScenarioConfig scenario_from_json_or_throw(const std::string& text) {
  ScenarioConfig config;
  auto errors = scenario_from_json(text, config);
  if (!errors.empty()) fail(ErrorCode::InvalidScenario, errors.front());
  return config;
}

std::string scenario_to_json(const ScenarioConfig& config) {
  json routes = json::object();
  for (const auto& [name, members] : config.topology.routes) {
    routes[name] = members;
  }

  json controller = {{"mode", to_string(config.controller.mode)},
                     {"cbr",
                      {{"theta_sim", config.controller.cbr.theta_sim},
                       {"theta_retain", config.controller.cbr.theta_retain},
                       {"capacity", config.controller.cbr.capacity}}},
                     {"rl",
                      {{"alpha", config.controller.rl.alpha},
                       {"gamma", config.controller.rl.gamma},
                       {"epsilon", config.controller.rl.epsilon}}}};
  if (!config.controller.memory_in.empty()) {
    controller["memory_in"] = config.controller.memory_in;
  }
  if (!config.controller.memory_out.empty()) {
    controller["memory_out"] = config.controller.memory_out;
  }

  json phases = json::array();
  for (const PhaseSpec& phase : config.workload.phases) {
    json pj;
    if (phase.explicit_rates()) {
      pj["rates"] = phase.rates;
    } else {
      json loads = json::array();
      for (LoadLevel level : phase.loads) loads.push_back(to_string(level));
      pj["loads"] = loads;
    }
    pj["dwell"] = phase.dwell;
    phases.push_back(pj);
  }

  json j = {
      {"schema_version", 1},
      {"classes", config.classes},
      {"topology", {{"links", config.topology.links}, {"routes", routes}}},
      {"bam",
       {{"capacity", config.capacity},
        {"initial", to_string(config.initial_bam)},
        {"switch_mode", to_string(config.switch_mode)},
        {"mam_bc", config.mam_bc},
        {"rdm_bc", config.rdm_bc},
        {"atcs_bc", config.atcs_bc}}},
      {"controller", controller},
      {"policy",
       {{"w_util", config.policy.w_util},
        {"w_block", config.policy.w_block},
        {"w_loss", config.policy.w_loss},
        {"switch_cost", config.policy.switch_cost}}},
      {"workload",
       {{"class_routes", config.class_routes},
        {"reference_bc", config.workload.reference_bc},
        {"demands",
         {{"values", config.workload.demands.values},
          {"weights", config.workload.demands.weights}}},
        {"mean_holding", config.workload.mean_holding},
        {"phases", phases}}},
      {"sim",
       {{"duration", config.sim.duration},
        {"epoch_length", config.sim.epoch_length},
        {"warmup_epochs", config.sim.warmup_epochs}}}};
  return j.dump(2) + "\n";
}

}  // namespace bamsim
