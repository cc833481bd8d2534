#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bamsim/scenario.hpp"
#include "bamsim/sim.hpp"

namespace bamsim {

// Full run report as canonical JSON: sorted keys, shortest round-trip
// numbers, byte-identical for identical runs.
std::string report_to_json(const RunReport& report,
                           const ScenarioConfig& config);

// One line per epoch plus '#'-prefixed totals footer lines.
std::string epochs_to_csv(const RunReport& report);

// Aggregates of one controller variant across seeds, for comparisons.
struct CompareEntry {
  std::string label;
  std::vector<std::uint64_t> seeds;
  std::vector<double> rewards;
  std::vector<double> utilizations;
  std::vector<double> blockings;
  std::vector<std::int64_t> switches;
  std::vector<std::string> digests;  // workload digests, hex
  double mean_reward = 0.0;
  double mean_utilization = 0.0;
  double mean_blocking = 0.0;
  double mean_switches = 0.0;
};

CompareEntry summarize_runs(const std::string& label,
                            const std::vector<std::uint64_t>& seeds,
                            const std::vector<RunReport>& reports);

std::string compare_to_json(const std::vector<CompareEntry>& entries,
                            const ScenarioConfig& config);
std::string compare_to_text(const std::vector<CompareEntry>& entries);

}  // namespace bamsim
