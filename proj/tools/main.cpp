#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bamsim/report_io.hpp"
#include "bamsim/scenario.hpp"
#include "bamsim/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;  // bad scenario or bad inputs
constexpr int kExitRuntime = 2;  // IO failures, internal errors

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return bool(out);
}

int load_scenario(const std::string& path, bamsim::ScenarioConfig& config) {
  if (path.empty()) {
    config = bamsim::default_scenario();
    return kExitOk;
  }
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitRuntime;
  }
  auto errors = bamsim::scenario_from_json(text, config);
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << path << ": " << e << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

int emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
    return kExitOk;
  }
  if (!write_file(out_path, content)) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_validate(const std::string& scenario_path) {
  bamsim::ScenarioConfig config;
  const int rc = load_scenario(scenario_path, config);
  if (rc != kExitOk) return rc;
  std::cout << bamsim::scenario_to_json(config);
  return kExitOk;
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed,
            const std::string& out_path, const std::string& format,
            const std::string& epochs_csv_path, bool check_invariants) {
  bamsim::ScenarioConfig config;
  const int rc = load_scenario(scenario_path, config);
  if (rc != kExitOk) return rc;

  bamsim::RunOptions options;
  options.check_invariants = check_invariants;
  if (!config.controller.memory_in.empty()) {
    if (!read_file(config.controller.memory_in, options.memory_in_text)) {
      std::cerr << "error: cannot read " << config.controller.memory_in
                << "\n";
      return kExitRuntime;
    }
  }

  const bamsim::RunReport report = bamsim::run(config, seed, options);

  if (!config.controller.memory_out.empty() &&
      !write_file(config.controller.memory_out, report.controller_memory)) {
    std::cerr << "error: cannot write " << config.controller.memory_out
              << "\n";
    return kExitRuntime;
  }
  if (!epochs_csv_path.empty() &&
      !write_file(epochs_csv_path, bamsim::epochs_to_csv(report))) {
    std::cerr << "error: cannot write " << epochs_csv_path << "\n";
    return kExitRuntime;
  }

  const std::string content = format == "csv"
                                  ? bamsim::epochs_to_csv(report)
                                  : bamsim::report_to_json(report, config);
  return emit(content, out_path);
}

int cmd_compare(const std::string& scenario_path,
                const std::string& controllers, int seeds,
                std::uint64_t seed_base, bool unpaired,
                const std::string& out_path, const std::string& format) {
  bamsim::ScenarioConfig config;
  const int rc = load_scenario(scenario_path, config);
  if (rc != kExitOk) return rc;

  std::vector<std::string> labels;
  std::stringstream ss(controllers);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) labels.push_back(item);
  }
  if (labels.empty()) {
    std::cerr << "error: no controllers given\n";
    return kExitInvalid;
  }

  std::vector<bamsim::CompareEntry> entries;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    // "mode" or "static:KIND" to pin the non-switching baseline's model.
    std::string mode_name = labels[i];
    std::string kind_name;
    if (auto colon = mode_name.find(':'); colon != std::string::npos) {
      kind_name = mode_name.substr(colon + 1);
      mode_name = mode_name.substr(0, colon);
    }
    auto mode = bamsim::controller_mode_from_string(mode_name);
    if (!mode) {
      std::cerr << "error: unknown controller " << labels[i] << "\n";
      return kExitInvalid;
    }
    bamsim::ScenarioConfig variant = config;
    variant.controller.mode = *mode;
    variant.controller.memory_in.clear();
    variant.controller.memory_out.clear();
    if (!kind_name.empty()) {
      auto kind = bamsim::bam_kind_from_string(kind_name);
      if (!kind || *mode != bamsim::ControllerMode::Static) {
        std::cerr << "error: bad controller variant " << labels[i] << "\n";
        return kExitInvalid;
      }
      variant.initial_bam = *kind;
    }

    std::vector<std::uint64_t> seed_list;
    for (int k = 0; k < seeds; ++k) {
      const std::uint64_t offset =
          unpaired ? static_cast<std::uint64_t>(i) * seeds + k
                   : static_cast<std::uint64_t>(k);
      seed_list.push_back(seed_base + offset);
    }

    std::vector<bamsim::RunReport> reports;
    reports.reserve(seed_list.size());
    for (std::uint64_t s : seed_list) {
      reports.push_back(bamsim::run(variant, s));
    }
    entries.push_back(bamsim::summarize_runs(labels[i], seed_list, reports));
  }

  const std::string content = format == "json"
                                  ? bamsim::compare_to_json(entries, config)
                                  : bamsim::compare_to_text(entries);
  return emit(content, out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-class link admission simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string format = "json";
  std::string epochs_csv_path;
  bool check_invariants = false;

  CLI::App* validate = app.add_subcommand(
      "validate", "Check a scenario file and echo the effective config");
  validate->add_option("scenario", scenario_path,
                       "Scenario JSON file (built-in defaults when omitted)");

  CLI::App* run_cmd =
      app.add_subcommand("run", "Simulate one scenario with one seed");
  run_cmd->add_option("scenario", scenario_path,
                      "Scenario JSON file (built-in defaults when omitted)");
  run_cmd->add_option("--seed", seed, "Random seed (default 1)");
  run_cmd->add_option("--out", out_path, "Write the report here (default stdout)");
  run_cmd->add_option("--format", format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  run_cmd->add_option("--epochs-csv", epochs_csv_path,
                      "Also write the per-epoch CSV here");
  run_cmd->add_flag("--check-invariants", check_invariants,
                    "Verify internal consistency after every event");

  std::string controllers = "static,rules,cbr,rl";
  int seeds = 5;
  std::uint64_t seed_base = 1;
  bool unpaired = false;
  std::string cmp_format = "text";

  CLI::App* compare = app.add_subcommand(
      "compare", "Run several controllers over a seed set and tabulate");
  compare->add_option("scenario", scenario_path,
                      "Scenario JSON file (built-in defaults when omitted)");
  compare->add_option("--controllers", controllers,
                      "Comma list: static[:KIND], rules, cbr, rl");
  compare->add_option("--seeds", seeds, "Seeds per controller (default 5)")
      ->check(CLI::PositiveNumber);
  compare->add_option("--seed-base", seed_base, "First seed (default 1)");
  compare->add_flag("--unpaired", unpaired,
                    "Give every controller its own seed range");
  compare->add_option("--out", out_path, "Write the table here (default stdout)");
  compare->add_option("--format", cmp_format, "Output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(scenario_path);
    if (run_cmd->parsed()) {
      return cmd_run(scenario_path, seed, out_path, format, epochs_csv_path,
                     check_invariants);
    }
    return cmd_compare(scenario_path, controllers, seeds, seed_base, unpaired,
                       out_path, cmp_format);
  } catch (const bamsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
