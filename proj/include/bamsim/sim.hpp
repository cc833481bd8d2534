#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bamsim/controller.hpp"
#include "bamsim/scenario.hpp"
#include "bamsim/topology.hpp"
#include "bamsim/types.hpp"

namespace bamsim {

// Piecewise integration of carried load plus per-class counters for one
// epoch. Call advance(now) before every state change, set_load after it.
class EpochAccumulator {
 public:
  EpochAccumulator(int class_count, Bandwidth capacity_total,
                   double high_util_cut = 0.98);

  void reset(double now);
  void advance(double now);
  void set_load(Bandwidth used_total) { load_ = used_total; }
  void record_arrival(int cls, double offered_bh);
  void record_reject(int cls);
  void record_preemptions(std::int64_t count) { preemptions_ += count; }

  struct Epoch {
    double start = 0.0;
    double end = 0.0;
    double utilization = 0.0;  // time-weighted carried / capacity
    double loss_proxy = 0.0;   // time fraction at or above the high-util cut
    std::vector<std::int64_t> arrivals;
    std::vector<std::int64_t> rejects;
    std::vector<double> offered_bh;
    std::int64_t preemptions = 0;
  };

  // Closes the epoch at `now`; the window must have positive length.
  Epoch finalize(double now);

 private:
  int classes_;
  Bandwidth capacity_;
  double cut_;
  double start_ = 0.0;
  double last_ = 0.0;
  Bandwidth load_ = 0;
  double util_integral_ = 0.0;
  double high_time_ = 0.0;
  std::vector<std::int64_t> arrivals_;
  std::vector<std::int64_t> rejects_;
  std::vector<double> offered_;
  std::int64_t preemptions_ = 0;
};

// One finished epoch in a run report.
struct EpochRow {
  int epoch = 0;  // 1-based
  BamKind bam = BamKind::MAM;  // model that governed this epoch
  double utilization = 0.0;
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> rejects;
  std::vector<double> offered_bh;
  std::vector<double> blocking;  // rejects/arrivals, 0 for idle classes
  double aggregate_blocking = 0.0;
  double mean_blocking = 0.0;
  double loss_proxy = 0.0;
  std::int64_t preemptions = 0;
  int profile_id = 0;
  BamKind action = BamKind::MAM;  // model picked for the next epoch
  bool switched = false;
  double reward = 0.0;  // reward this epoch earned its entering action
};

// Aggregates over the measured (post-warmup) epochs, except occupancy which
// covers the whole run.
struct RunTotals {
  int measured_epochs = 0;
  double mean_utilization = 0.0;
  double mean_reward = 0.0;
  double aggregate_blocking = 0.0;
  double mean_blocking = 0.0;
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> rejects;
  std::int64_t preemptions = 0;
  std::int64_t switches = 0;
  double occupancy = 0.0;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::uint64_t workload_digest = 0;
  std::size_t flow_count = 0;
  std::vector<EpochRow> epochs;
  RunTotals totals;
  PathCounters lifetime;  // whole run, warm-up included
  std::vector<LinkView> final_links;
  std::string controller_memory;  // final snapshot, empty for stateless modes
};

struct RunOptions {
  bool check_invariants = false;  // coherence scan after every event
  std::string memory_in_text;     // preloaded controller memory, "" = none
};

// Runs the scenario to completion. Identical (config, seed, options) produce
// identical reports on any platform.
RunReport run(const ScenarioConfig& config, std::uint64_t seed,
              const RunOptions& options = {});

}  // namespace bamsim
