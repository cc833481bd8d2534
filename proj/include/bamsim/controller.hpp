#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bamsim/rng.hpp"
#include "bamsim/traffic.hpp"
#include "bamsim/types.hpp"

namespace bamsim {

// Weights of the epoch reward:
//   w_util * utilization - w_block * mean_blocking - w_loss * loss_proxy
//   - switch_cost * [model switched]
struct ManagerPolicy {
  double w_util = 1.0;
  double w_block = 1.0;
  double w_loss = 1.0;
  double switch_cost = 0.05;
};

// What one finished epoch looked like.
struct MetricsSnapshot {
  int epoch = 0;
  double utilization = 0.0;  // time-weighted carried load / capacity
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> rejects;
  std::vector<double> offered_bh;  // per class, bandwidth x holding
  std::int64_t preemptions = 0;
  double loss_proxy = 0.0;  // fraction of the epoch at >= 98% utilization
  BamKind active_bam = BamKind::MAM;

  // rejects / arrivals for one class; 0 when the class saw no arrivals.
  double class_blocking(int cls) const;
  // total rejects / total arrivals; 0 when nothing arrived.
  double aggregate_blocking() const;
  // mean of class_blocking over classes that saw arrivals; 0 when none did.
  double mean_blocking() const;
};

double reward(const ManagerPolicy& policy, const MetricsSnapshot& m,
              bool switched);

// Models able to serve a recognized situation. Unrecognized situations leave
// all three in play.
std::vector<BamKind> indicated_bams(int profile_id);

// Rule table: keep the current model when it is indicated, otherwise take the
// first indicated one in MAM, RDM, ATCS order.
BamKind rules_decide(BamKind current, int profile_id);

// Situation descriptor for case matching: three per-class offered
// intensities, utilization, and aggregate blocking.
inline constexpr int kFeatureCount = 5;
using Features = std::array<double, kFeatureCount>;

double feature_distance(const Features& a, const Features& b);
Features make_features(const ObservationWindow& window,
                       const std::vector<Bandwidth>& reference_bc,
                       double aggregate_blocking);

struct CbrParams {
  double theta_sim = 0.15;     // cases strictly closer than this are similar
  double theta_retain = 0.05;  // new case unless one is at most this close
  std::size_t capacity = 512;
};

struct Case {
  Features features{};
  BamKind action = BamKind::MAM;
  double outcome = 0.0;
  std::uint64_t stamp = 0;  // retention counter, larger = newer

  friend bool operator==(const Case&, const Case&) = default;
};

class CaseBase {
 public:
  explicit CaseBase(std::size_t capacity) : capacity_(capacity) {}

  std::size_t size() const { return cases_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<Case>& cases() const { return cases_; }

  // Closest case, most recent on distance ties; nullptr when empty.
  // `distance_out`, when given, receives the winning distance.
  const Case* nearest(const Features& f, double* distance_out = nullptr) const;

  // Keeps the experience: replaces the nearest case within theta_retain when
  // strictly better, inserts a new case when nothing is that close, and
  // otherwise drops it. Overflow evicts the worst-outcome (oldest on ties)
  // case.
  void retain(const Features& f, BamKind action, double outcome,
              double theta_retain);

  std::string save_text() const;
  static CaseBase load_text(const std::string& text, std::size_t capacity);

  friend bool operator==(const CaseBase&, const CaseBase&) = default;

 private:
  std::size_t capacity_ = 0;
  std::vector<Case> cases_;
  std::uint64_t next_stamp_ = 1;
};

// Reuses the nearest similar case's action when no similar case with a
// different action beat its outcome; falls back to the rule table when the
// neighborhood is empty or disagrees.
BamKind cbr_decide(const CaseBase& base, const Features& f, BamKind current,
                   int profile_id, double theta_sim);

struct RlParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
};

inline constexpr int kRlStateCount = 6;

// Compact state index: recognized situations 1..4 map to 0..3, unrecognized
// ones split on the overload flag (4 normal, 5 overloaded).
int rl_state(int profile_id, bool overloaded);

class QTable {
 public:
  double q(int state, int action) const { return q_[state][action]; }
  void set_q(int state, int action, double v) { q_[state][action] = v; }

  // Highest-value action, lowest index on ties (MAM, RDM, ATCS order).
  int greedy(int state) const;

  std::string save_text() const;
  static QTable load_text(const std::string& text);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::array<std::array<double, kBamKindCount>, kRlStateCount> q_{};
};

// Epsilon-greedy action pick. Only draws from `rng` when epsilon > 0: one
// uniform for the explore test, a second to pick the explored action.
int rl_decide(const QTable& table, int state, double epsilon, Rng& rng);

// One-step update: q += alpha * (r + gamma * max_a q(s', a) - q).
void rl_update(QTable& table, int state, int action, double reward_value,
               int next_state, const RlParams& params);

enum class ControllerMode { Static, Rules, Cbr, Rl };
const char* to_string(ControllerMode m);
std::optional<ControllerMode> controller_mode_from_string(std::string_view s);

// Everything a controller may look at when picking the next model.
struct ControllerContext {
  MetricsSnapshot metrics;
  TrafficProfile profile;
  int profile_id = 0;
  Features features{};
  int state = 0;  // rl_state of the profile
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual ControllerMode mode() const = 0;

  // Model to run next epoch. `current` is the model that just ran.
  virtual BamKind decide(const ControllerContext& ctx, BamKind current,
                         Rng& rng) = 0;

  // Feedback for the `action` chosen after `prev`, judged by the epoch that
  // followed it (`now`). Default: stateless, ignore.
  virtual void learn(const ControllerContext& prev, BamKind action,
                     double reward_value, const ControllerContext& now);

  virtual bool has_memory() const { return false; }
  virtual std::string save_memory() const;
  virtual void load_memory(const std::string& text);
};

class StaticController : public Controller {
 public:
  explicit StaticController(BamKind kind) : kind_(kind) {}
  ControllerMode mode() const override { return ControllerMode::Static; }
  BamKind decide(const ControllerContext&, BamKind, Rng&) override {
    return kind_;
  }

 private:
  BamKind kind_;
};

class RulesController : public Controller {
 public:
  ControllerMode mode() const override { return ControllerMode::Rules; }
  BamKind decide(const ControllerContext& ctx, BamKind current,
                 Rng&) override {
    return rules_decide(current, ctx.profile_id);
  }
};

class CbrController : public Controller {
 public:
  explicit CbrController(const CbrParams& params)
      : params_(params), base_(params.capacity) {}
  ControllerMode mode() const override { return ControllerMode::Cbr; }
  BamKind decide(const ControllerContext& ctx, BamKind current,
                 Rng&) override {
    return cbr_decide(base_, ctx.features, current, ctx.profile_id,
                      params_.theta_sim);
  }
  void learn(const ControllerContext& prev, BamKind action,
             double reward_value, const ControllerContext&) override {
    base_.retain(prev.features, action, reward_value, params_.theta_retain);
  }
  bool has_memory() const override { return true; }
  std::string save_memory() const override { return base_.save_text(); }
  void load_memory(const std::string& text) override {
    base_ = CaseBase::load_text(text, params_.capacity);
  }
  const CaseBase& case_base() const { return base_; }

 private:
  CbrParams params_;
  CaseBase base_;
};

class RlController : public Controller {
 public:
  explicit RlController(const RlParams& params) : params_(params) {}
  ControllerMode mode() const override { return ControllerMode::Rl; }
  BamKind decide(const ControllerContext& ctx, BamKind, Rng& rng) override {
    return static_cast<BamKind>(
        rl_decide(table_, ctx.state, params_.epsilon, rng));
  }
  void learn(const ControllerContext& prev, BamKind action,
             double reward_value, const ControllerContext& now) override {
    rl_update(table_, prev.state, static_cast<int>(action), reward_value,
              now.state, params_);
  }
  bool has_memory() const override { return true; }
  std::string save_memory() const override { return table_.save_text(); }
  void load_memory(const std::string& text) override {
    table_ = QTable::load_text(text);
  }
  const QTable& qtable() const { return table_; }

 private:
  RlParams params_;
  QTable table_;
};

std::unique_ptr<Controller> make_controller(ControllerMode mode,
                                            BamKind static_kind,
                                            const CbrParams& cbr,
                                            const RlParams& rl);

}  // namespace bamsim
