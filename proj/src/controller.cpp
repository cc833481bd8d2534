#include "bamsim/controller.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace bamsim {

namespace {

using nlohmann::json;

json parse_memory(const std::string& text, const char* expected_kind) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    fail(ErrorCode::InvalidSpec, "memory file is not a JSON object");
  }
  if (j.value("schema_version", 0) != 1) {
    fail(ErrorCode::InvalidSpec, "memory file has an unsupported version");
  }
  if (j.value("kind", "") != expected_kind) {
    fail(ErrorCode::InvalidSpec, std::string("memory file is not a ") +
                                     expected_kind + " snapshot");
  }
  return j;
}

}  // namespace

double MetricsSnapshot::class_blocking(int cls) const {
  if (arrivals[cls] == 0) return 0.0;
  return static_cast<double>(rejects[cls]) /
         static_cast<double>(arrivals[cls]);
}

double MetricsSnapshot::aggregate_blocking() const {
  std::int64_t arr = 0;
  std::int64_t rej = 0;
  for (std::size_t c = 0; c < arrivals.size(); ++c) {
    arr += arrivals[c];
    rej += rejects[c];
  }
  if (arr == 0) return 0.0;
  return static_cast<double>(rej) / static_cast<double>(arr);
}

double MetricsSnapshot::mean_blocking() const {
  double sum = 0.0;
  int engaged = 0;
  for (std::size_t c = 0; c < arrivals.size(); ++c) {
    if (arrivals[c] == 0) continue;
    sum += class_blocking(static_cast<int>(c));
    ++engaged;
  }
  if (engaged == 0) return 0.0;
  return sum / engaged;
}

double reward(const ManagerPolicy& policy, const MetricsSnapshot& m,
              bool switched) {
  return policy.w_util * m.utilization - policy.w_block * m.mean_blocking() -
         policy.w_loss * m.loss_proxy -
         (switched ? policy.switch_cost : 0.0);
}

std::vector<BamKind> indicated_bams(int profile_id) {
  switch (profile_id) {
    case 1:
      return {BamKind::RDM, BamKind::ATCS};
    case 4:
      return {BamKind::MAM};
    default:
      return {BamKind::MAM, BamKind::RDM, BamKind::ATCS};
  }
}

BamKind rules_decide(BamKind current, int profile_id) {
  const auto indicated = indicated_bams(profile_id);
  for (BamKind k : indicated) {
    if (k == current) return current;
  }
  return indicated.front();
}

double feature_distance(const Features& a, const Features& b) {
  double sum = 0.0;
  for (int i = 0; i < kFeatureCount; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Features make_features(const ObservationWindow& window,
                       const std::vector<Bandwidth>& reference_bc,
                       double aggregate_blocking) {
  if (reference_bc.size() != 3 || window.offered_bh.size() != 3) {
    fail(ErrorCode::InvalidSpec, "case features need exactly three classes");
  }
  if (window.duration <= 0.0) {
    fail(ErrorCode::EmptyWindow, "observation window has no duration");
  }
  Features f{};
  for (int c = 0; c < 3; ++c) {
    f[c] = window.offered_bh[c] / window.duration /
           static_cast<double>(reference_bc[c]);
  }
  f[3] = window.utilization;
  f[4] = aggregate_blocking;
  return f;
}

const Case* CaseBase::nearest(const Features& f, double* distance_out) const {
  const Case* best = nullptr;
  double best_d = 0.0;
  for (const Case& c : cases_) {
    const double d = feature_distance(f, c.features);
    if (!best || d < best_d || (d == best_d && c.stamp > best->stamp)) {
      best = &c;
      best_d = d;
    }
  }
  if (best && distance_out) *distance_out = best_d;
  return best;
}

void CaseBase::retain(const Features& f, BamKind action, double outcome,
                      double theta_retain) {
  double d = 0.0;
  const Case* near = nearest(f, &d);
  Case fresh{f, action, outcome, next_stamp_};
  if (near && d <= theta_retain) {
    if (outcome > near->outcome) {
      ++next_stamp_;
      cases_[static_cast<std::size_t>(near - cases_.data())] = fresh;
    }
    return;
  }
  ++next_stamp_;
  cases_.push_back(fresh);
  if (cases_.size() > capacity_) {
    auto worst = std::min_element(
        cases_.begin(), cases_.end(), [](const Case& a, const Case& b) {
          if (a.outcome != b.outcome) return a.outcome < b.outcome;
          return a.stamp < b.stamp;
        });
    cases_.erase(worst);
  }
}

std::string CaseBase::save_text() const {
  json cases = json::array();
  for (const Case& c : cases_) {
    cases.push_back({{"features", c.features},
                     {"action", to_string(c.action)},
                     {"outcome", c.outcome},
                     {"stamp", c.stamp}});
  }
  json j = {{"schema_version", 1},
            {"kind", "cbr_case_base"},
            {"capacity", capacity_},
            {"next_stamp", next_stamp_},
            {"cases", cases}};
  return j.dump(2) + "\n";
}

CaseBase CaseBase::load_text(const std::string& text, std::size_t capacity) {
  json j = parse_memory(text, "cbr_case_base");
  CaseBase base(capacity);
  if (!j.contains("cases") || !j["cases"].is_array()) {
    fail(ErrorCode::InvalidSpec, "case memory lacks a cases array");
  }
  for (const json& cj : j["cases"]) {
    Case c;
    if (!cj.contains("features") || !cj["features"].is_array() ||
        cj["features"].size() != kFeatureCount) {
      fail(ErrorCode::InvalidSpec, "case memory entry has bad features");
    }
    for (int i = 0; i < kFeatureCount; ++i) {
      c.features[i] = cj["features"][i].get<double>();
    }
    auto action = bam_kind_from_string(cj.value("action", ""));
    if (!action) {
      fail(ErrorCode::InvalidSpec, "case memory entry has a bad action");
    }
    c.action = *action;
    if (!cj.contains("outcome") || !cj["outcome"].is_number()) {
      fail(ErrorCode::InvalidSpec, "case memory entry has a bad outcome");
    }
    c.outcome = cj["outcome"].get<double>();
    c.stamp = cj.value("stamp", std::uint64_t{0});
    base.cases_.push_back(c);
    base.next_stamp_ = std::max(base.next_stamp_, c.stamp + 1);
  }
  if (j.contains("next_stamp") && j["next_stamp"].is_number_unsigned()) {
    base.next_stamp_ =
        std::max(base.next_stamp_, j["next_stamp"].get<std::uint64_t>());
  }
  while (base.cases_.size() > base.capacity_) {
    auto worst = std::min_element(
        base.cases_.begin(), base.cases_.end(),
        [](const Case& a, const Case& b) {
          if (a.outcome != b.outcome) return a.outcome < b.outcome;
          return a.stamp < b.stamp;
        });
    base.cases_.erase(worst);
  }
  return base;
}

BamKind cbr_decide(const CaseBase& base, const Features& f, BamKind current,
                   int profile_id, double theta_sim) {
  double d = 0.0;
  const Case* retrieved = base.nearest(f, &d);
  if (!retrieved || d >= theta_sim) {
    return rules_decide(current, profile_id);
  }
  for (const Case& c : base.cases()) {
    if (c.action == retrieved->action) continue;
    if (feature_distance(f, c.features) >= theta_sim) continue;
    if (c.outcome > retrieved->outcome) {
      return rules_decide(current, profile_id);
    }
  }
  return retrieved->action;
}

int rl_state(int profile_id, bool overloaded) {
  switch (profile_id) {
    case 1:
      return 0;
    case 2:
      return 1;
    case 3:
      return 2;
    case 4:
      return 3;
    default:
      return overloaded ? 5 : 4;
  }
}

int QTable::greedy(int state) const {
  int best = 0;
  for (int a = 1; a < kBamKindCount; ++a) {
    if (q_[state][a] > q_[state][best]) best = a;
  }
  return best;
}

std::string QTable::save_text() const {
  json rows = json::array();
  for (int s = 0; s < kRlStateCount; ++s) {
    json row = json::array();
    for (int a = 0; a < kBamKindCount; ++a) row.push_back(q_[s][a]);
    rows.push_back(row);
  }
  json j = {{"schema_version", 1}, {"kind", "qtable"}, {"q", rows}};
  return j.dump(2) + "\n";
}

QTable QTable::load_text(const std::string& text) {
  json j = parse_memory(text, "qtable");
  if (!j.contains("q") || !j["q"].is_array() ||
      j["q"].size() != kRlStateCount) {
    fail(ErrorCode::InvalidSpec, "value memory lacks a 6-row table");
  }
  QTable table;
  for (int s = 0; s < kRlStateCount; ++s) {
    const json& row = j["q"][s];
    if (!row.is_array() || row.size() != kBamKindCount) {
      fail(ErrorCode::InvalidSpec, "value memory row has bad width");
    }
    for (int a = 0; a < kBamKindCount; ++a) {
      if (!row[a].is_number()) {
        fail(ErrorCode::InvalidSpec, "value memory entry is not a number");
      }
      table.q_[s][a] = row[a].get<double>();
    }
  }
  return table;
}

int rl_decide(const QTable& table, int state, double epsilon, Rng& rng) {
  if (epsilon > 0.0) {
    if (rng.next_unit() < epsilon) {
      const int a = static_cast<int>(rng.next_unit() * kBamKindCount);
      return std::min(a, kBamKindCount - 1);
    }
  }
  return table.greedy(state);
}

void rl_update(QTable& table, int state, int action, double reward_value,
               int next_state, const RlParams& params) {
  double best_next = table.q(next_state, 0);
  for (int a = 1; a < kBamKindCount; ++a) {
    best_next = std::max(best_next, table.q(next_state, a));
  }
  const double target = reward_value + params.gamma * best_next;
  table.set_q(state, action,
              table.q(state, action) +
                  params.alpha * (target - table.q(state, action)));
}

const char* to_string(ControllerMode m) {
  switch (m) {
    case ControllerMode::Static:
      return "static";
    case ControllerMode::Rules:
      return "rules";
    case ControllerMode::Cbr:
      return "cbr";
    case ControllerMode::Rl:
      return "rl";
  }
  return "?";
}

std::optional<ControllerMode> controller_mode_from_string(
    std::string_view s) {
  if (s == "static") return ControllerMode::Static;
  if (s == "rules") return ControllerMode::Rules;
  if (s == "cbr") return ControllerMode::Cbr;
  if (s == "rl") return ControllerMode::Rl;
  return std::nullopt;
}

void Controller::learn(const ControllerContext&, BamKind, double,
                       const ControllerContext&) {}

std::string Controller::save_memory() const {
  fail(ErrorCode::BadState, "controller keeps no memory");
}

void Controller::load_memory(const std::string&) {
  fail(ErrorCode::BadState, "controller keeps no memory");
}

std::unique_ptr<Controller> make_controller(ControllerMode mode,
                                            BamKind static_kind,
                                            const CbrParams& cbr,
                                            const RlParams& rl) {
  switch (mode) {
    case ControllerMode::Static:
      return std::make_unique<StaticController>(static_kind);
    case ControllerMode::Rules:
      return std::make_unique<RulesController>();
    case ControllerMode::Cbr:
      return std::make_unique<CbrController>(cbr);
    case ControllerMode::Rl:
      return std::make_unique<RlController>(rl);
  }
  fail(ErrorCode::BadState, "unknown controller mode");
}

}  // namespace bamsim
