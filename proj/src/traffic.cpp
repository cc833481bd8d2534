#include "bamsim/traffic.hpp"

#include <algorithm>
#include <cstring>

namespace bamsim {

namespace {

constexpr std::uint64_t kWorkloadStream = 0x574b4c44;  // workload substream tag

constexpr double kLowFraction = 0.2;
constexpr double kMediumFraction = 0.5;
constexpr double kHighFraction = 0.8;

constexpr double kLowCut = 0.35;     // intensity at or below this is Low
constexpr double kMediumCut = 0.65;  // intensity at or below this is Medium
constexpr double kOverloadCut = 0.9;

}  // namespace

const char* to_string(LoadLevel v) {
  switch (v) {
    case LoadLevel::Low:
      return "low";
    case LoadLevel::Medium:
      return "medium";
    case LoadLevel::High:
      return "high";
  }
  return "?";
}

std::optional<LoadLevel> load_level_from_string(std::string_view s) {
  if (s == "low") return LoadLevel::Low;
  if (s == "medium") return LoadLevel::Medium;
  if (s == "high") return LoadLevel::High;
  return std::nullopt;
}

double offered_fraction(LoadLevel level) {
  switch (level) {
    case LoadLevel::Low:
      return kLowFraction;
    case LoadLevel::Medium:
      return kMediumFraction;
    case LoadLevel::High:
      return kHighFraction;
  }
  return 0.0;
}

double level_to_rate(LoadLevel level, Bandwidth reference_bc,
                     double mean_demand, double mean_holding) {
  return offered_fraction(level) * static_cast<double>(reference_bc) /
         (mean_demand * mean_holding);
}

int match_profile_id(const TrafficProfile& profile) {
  if (profile.levels.size() != 3) return 0;
  const LoadLevel a = profile.levels[0];
  const LoadLevel b = profile.levels[1];
  const LoadLevel c = profile.levels[2];
  using L = LoadLevel;
  if (!profile.overloaded) {
    if (a == L::High && b == L::Low && c == L::Low) return 1;
    if (a == L::Medium && b == L::Low && c == L::High) return 2;
    if (a == L::Low && b == L::Medium && c == L::High) return 3;
    return 0;
  }
  if (a == L::High && b == L::High && c == L::High) return 4;
  return 0;
}

TrafficProfile classify_profile(const ObservationWindow& window,
                                const std::vector<Bandwidth>& reference_bc) {
  if (window.duration <= 0.0) {
    fail(ErrorCode::EmptyWindow, "observation window has no duration");
  }
  if (window.offered_bh.size() != reference_bc.size()) {
    fail(ErrorCode::InvalidSpec,
         "observation window and reference share counts differ");
  }
  TrafficProfile profile;
  for (std::size_t c = 0; c < reference_bc.size(); ++c) {
    if (reference_bc[c] <= 0) {
      fail(ErrorCode::InvalidSpec,
           "reference share " + std::to_string(c) + " must be positive");
    }
    const double intensity = window.offered_bh[c] / window.duration /
                             static_cast<double>(reference_bc[c]);
    LoadLevel level = LoadLevel::High;
    if (intensity <= kLowCut) {
      level = LoadLevel::Low;
    } else if (intensity <= kMediumCut) {
      level = LoadLevel::Medium;
    }
    profile.levels.push_back(level);
  }
  profile.overloaded = window.utilization >= kOverloadCut;
  return profile;
}

std::vector<std::string> DemandDistribution::validate() const {
  std::vector<std::string> errors;
  if (values.empty()) errors.push_back("values must be non-empty");
  if (values.size() != weights.size()) {
    errors.push_back("values and weights must have the same length");
    return errors;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= 0) {
      errors.push_back("values[" + std::to_string(i) + "] must be positive");
    }
    if (weights[i] <= 0.0) {
      errors.push_back("weights[" + std::to_string(i) + "] must be positive");
    }
  }
  return errors;
}

double DemandDistribution::mean() const {
  double sum = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += static_cast<double>(values[i]) * weights[i];
    total += weights[i];
  }
  return sum / total;
}

Bandwidth DemandDistribution::sample(Rng& rng) const {
  std::vector<double> cumulative(weights.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    run += weights[i];
    cumulative[i] = run;
  }
  return values[rng.pick(cumulative)];
}

std::vector<std::string> WorkloadSpec::validate() const {
  std::vector<std::string> errors;
  if (class_count < 1) errors.push_back("class_count must be at least 1");
  for (const auto& e : demands.validate()) errors.push_back("demands: " + e);
  if (mean_holding <= 0.0) errors.push_back("mean_holding must be positive");
  if (static_cast<int>(reference_bc.size()) != class_count) {
    errors.push_back("reference_bc must list one share per class");
  }
  for (std::size_t c = 0; c < reference_bc.size(); ++c) {
    if (reference_bc[c] <= 0) {
      errors.push_back("reference_bc[" + std::to_string(c) +
                       "] must be positive");
    }
  }
  if (phases.empty()) errors.push_back("phases must be non-empty");
  for (std::size_t p = 0; p < phases.size(); ++p) {
    const std::string at = "phases[" + std::to_string(p) + "]: ";
    const PhaseSpec& ph = phases[p];
    if (ph.dwell <= 0.0) errors.push_back(at + "dwell must be positive");
    if (!ph.rates.empty() && !ph.loads.empty()) {
      errors.push_back(at + "give loads or rates, not both");
    } else if (ph.rates.empty() && ph.loads.empty()) {
      errors.push_back(at + "give loads or rates");
    } else if (ph.explicit_rates()) {
      if (static_cast<int>(ph.rates.size()) != class_count) {
        errors.push_back(at + "rates must list one rate per class");
      }
      for (double r : ph.rates) {
        if (r <= 0.0) {
          errors.push_back(at + "rates must be positive");
          break;
        }
      }
    } else if (static_cast<int>(ph.loads.size()) != class_count) {
      errors.push_back(at + "loads must list one level per class");
    }
  }
  if (duration <= 0.0) errors.push_back("duration must be positive");
  return errors;
}

std::vector<FlowRequest> build_workload(const WorkloadSpec& spec,
                                        std::uint64_t seed) {
  {
    auto errors = spec.validate();
    if (!errors.empty()) fail(ErrorCode::InvalidSpec, errors.front());
  }
  const double mean_demand = spec.demands.mean();
  std::vector<double> cumulative(spec.demands.weights.size());
  double run = 0.0;
  for (std::size_t i = 0; i < spec.demands.weights.size(); ++i) {
    run += spec.demands.weights[i];
    cumulative[i] = run;
  }

  struct Draft {
    FlowRequest req;
    std::uint64_t stream_seq = 0;
  };
  std::vector<Draft> drafts;

  double t0 = 0.0;
  for (std::size_t instance = 0; t0 < spec.duration; ++instance) {
    const PhaseSpec& phase = spec.phases[instance % spec.phases.size()];
    const double t1 = std::min(t0 + phase.dwell, spec.duration);
    for (int cls = 0; cls < spec.class_count; ++cls) {
      const double rate =
          phase.explicit_rates()
              ? phase.rates[cls]
              : level_to_rate(phase.loads[cls], spec.reference_bc[cls],
                              mean_demand, spec.mean_holding);
      if (rate <= 0.0) continue;
      Rng rng(mix_seed(mix_seed(seed, kWorkloadStream, instance), cls));
      double t = t0;
      std::uint64_t seq = 0;
      for (;;) {
        t += rng.exponential(rate);
        if (t >= t1) break;
        Draft d;
        d.req.cls = cls;
        d.req.arrival_time = t;
        d.req.holding_time = rng.exponential(1.0 / spec.mean_holding);
        d.req.bandwidth = spec.demands.values[rng.pick(cumulative)];
        d.stream_seq = seq++;
        drafts.push_back(d);
      }
    }
    t0 = t1;
  }

  std::sort(drafts.begin(), drafts.end(), [](const Draft& x, const Draft& y) {
    if (x.req.arrival_time != y.req.arrival_time) {
      return x.req.arrival_time < y.req.arrival_time;
    }
    if (x.req.cls != y.req.cls) return x.req.cls < y.req.cls;
    return x.stream_seq < y.stream_seq;
  });

  std::vector<FlowRequest> flows;
  flows.reserve(drafts.size());
  FlowId next_id = 1;
  for (auto& d : drafts) {
    d.req.id = next_id++;
    flows.push_back(d.req);
  }
  return flows;
}

std::uint64_t workload_hash(const std::vector<FlowRequest>& flows) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  };
  auto bits = [](double d) {
    std::uint64_t v = 0;
    std::memcpy(&v, &d, sizeof(v));
    return v;
  };
  for (const FlowRequest& f : flows) {
    mix(f.id);
    mix(static_cast<std::uint64_t>(f.cls));
    mix(static_cast<std::uint64_t>(f.bandwidth));
    mix(bits(f.arrival_time));
    mix(bits(f.holding_time));
  }
  return h;
}

}  // namespace bamsim
