#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bamsim/rng.hpp"
#include "bamsim/types.hpp"

namespace bamsim {

// Per-class offered-load level, as a fraction of the class's reference share:
// Low offers 20%, Medium 50%, High 80%.
enum class LoadLevel { Low, Medium, High };
const char* to_string(LoadLevel v);
std::optional<LoadLevel> load_level_from_string(std::string_view s);

double offered_fraction(LoadLevel level);

// Arrival rate that makes class `cls` offer `fraction(level) * reference_bc`
// of carried bandwidth: rate = fraction * bc / (mean_demand * mean_holding).
double level_to_rate(LoadLevel level, Bandwidth reference_bc,
                     double mean_demand, double mean_holding);

// What an observation window looked like: per-class load levels plus whether
// the aggregate ran hot (utilization at or above 90%).
struct TrafficProfile {
  std::vector<LoadLevel> levels;
  bool overloaded = false;

  friend bool operator==(const TrafficProfile&, const TrafficProfile&) =
      default;
};

// Recognized three-class situations. Returns 0 when nothing matches.
//   1: (High, Low, Low), not overloaded
//   2: (Medium, Low, High), not overloaded
//   3: (Low, Medium, High), not overloaded
//   4: (High, High, High), overloaded
int match_profile_id(const TrafficProfile& profile);

// Aggregated observations of one epoch, the classifier's input. offered_bh[c]
// is the bandwidth-time product (demand x holding) of class-c arrivals.
struct ObservationWindow {
  double duration = 0.0;
  std::vector<double> offered_bh;
  double utilization = 0.0;
};

// Maps per-class offered intensity (offered_bh / duration / reference share)
// to levels: <= 0.35 Low, <= 0.65 Medium, else High. Overloaded at
// utilization >= 0.9.
TrafficProfile classify_profile(const ObservationWindow& window,
                                const std::vector<Bandwidth>& reference_bc);

// Discrete bandwidth-demand distribution.
struct DemandDistribution {
  std::vector<Bandwidth> values;
  std::vector<double> weights;

  std::vector<std::string> validate() const;
  double mean() const;
  Bandwidth sample(Rng& rng) const;

  friend bool operator==(const DemandDistribution&, const DemandDistribution&) =
      default;
};

// One stretch of stationary traffic: per-class load levels or explicit
// per-class arrival rates, held for `dwell` time units.
struct PhaseSpec {
  std::vector<LoadLevel> loads;  // used when rates is empty
  std::vector<double> rates;     // explicit rates override loads
  double dwell = 0.0;

  bool explicit_rates() const { return !rates.empty(); }
};

// Full workload recipe. Phases repeat in order until `duration` is covered.
struct WorkloadSpec {
  int class_count = 0;
  DemandDistribution demands;
  double mean_holding = 1.0;
  std::vector<Bandwidth> reference_bc;  // share basis for load levels
  std::vector<PhaseSpec> phases;
  double duration = 0.0;

  std::vector<std::string> validate() const;
};

// Poisson arrivals per phase and class, merged in time order, ids 1..n.
// Identical (spec, seed) pairs produce identical workloads on any platform.
std::vector<FlowRequest> build_workload(const WorkloadSpec& spec,
                                        std::uint64_t seed);

// Order-sensitive digest of a workload, for reproducibility checks.
std::uint64_t workload_hash(const std::vector<FlowRequest>& flows);

}  // namespace bamsim
